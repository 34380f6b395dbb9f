// Copyright 2026 The topocollapse Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "topocollapse/scene.h"

namespace topocollapse {

namespace {

class Checker {
   public:
    explicit Checker(const SceneDoc &doc) : doc_(doc) {}

    SceneReport run() {
        check_constants();
        check_identifiers();
        check_regions();
        check_source();
        check_components();
        check_passages();
        check_schedules();
        check_shutter_spacing();
        return std::move(report_);
    }

   private:
    void error(const std::string &subject, std::string message) {
        report_.issues.push_back({Severity::Error, subject, std::move(message)});
    }
    void warning(const std::string &subject, std::string message) {
        report_.issues.push_back({Severity::Warning, subject, std::move(message)});
    }

    bool region_exists(const std::string &id) const {
        return doc_.find_region(id) != nullptr;
    }

    void need_region(const std::string &subject, const std::string &region) {
        if (!region_exists(region)) {
            error(subject, "references unknown region '" + region + "'");
        }
    }

    void check_constants() {
        if (!(doc_.propagation_speed > 0.0) || !std::isfinite(doc_.propagation_speed)) {
            error("constants", "propagation speed must be positive and finite");
        }
        if (!(doc_.packet_duration > 0.0) || !std::isfinite(doc_.packet_duration)) {
            error("constants", "packet duration must be positive and finite");
        }
    }

    void check_identifiers() {
        std::set<std::string> seen;
        auto add = [&](const std::string &id) {
            if (!seen.insert(id).second) {
                error(id, "identifier declared more than once");
            }
        };
        for (const auto &r : doc_.regions) {
            add(r.id);
        }
        if (doc_.source) {
            add(doc_.source->id);
        }
        for (const auto &c : doc_.components) {
            add(c.id);
        }
        for (const auto &p : doc_.passages) {
            add(p.id);
        }
    }

    void check_regions() {
        for (const auto &r : doc_.regions) {
            if (r.length && !(*r.length > 0.0 && std::isfinite(*r.length))) {
                error(r.id, "fiber length must be positive, got " + format_double(*r.length));
            }
        }
    }

    void check_source() {
        if (!doc_.source) {
            error("", "scene has no source");
            return;
        }
        const auto &s = *doc_.source;
        if (s.terms.empty()) {
            error(s.id, "source has no terms");
            return;
        }
        if (!std::isfinite(s.time) || s.time < 0.0) {
            error(s.id, "emission time must be finite and non-negative");
        }
        double norm = 0.0;
        std::set<std::pair<std::string, Polarization>> modes;
        for (const auto &t : s.terms) {
            need_region(s.id, t.region);
            norm += t.amplitude * t.amplitude;
            if (!modes.emplace(t.region, t.polarization).second) {
                error(s.id, "source lists mode " + t.region + "/" + std::string(to_string(t.polarization)) + " twice");
            }
        }
        if (std::abs(norm - 1.0) > kAlgebraicTolerance) {
            error(s.id, "source amplitudes must be normalized (sum of squares is " + format_double(norm) + ")");
        }
    }

    void check_components() {
        std::map<std::string, std::string> consumer;  // region -> component reading it
        std::map<std::string, std::string> producer;  // region -> component writing it
        if (doc_.source) {
            for (const auto &t : doc_.source->terms) {
                producer.emplace(t.region, doc_.source->id);
            }
        }
        std::size_t screens = 0;
        for (const auto &c : doc_.components) {
            for (const auto &r : c.inputs) {
                need_region(c.id, r);
            }
            for (const auto &r : c.outputs) {
                need_region(c.id, r);
            }
            if (!c.location.empty()) {
                need_region(c.id, c.location);
            }
            // Components between static regions only shape the topology.
            bool on_fiber = std::all_of(c.inputs.begin(), c.inputs.end(), [&](const auto &r) {
                const auto *spec = doc_.find_region(r);
                return spec == nullptr || spec->is_fiber();
            });
            bool traversed = on_fiber && c.kind != ComponentKind::Detector && c.kind != ComponentKind::Screen &&
                             !(c.kind == ComponentKind::PockelsCell && !c.is_inline());
            if (traversed) {
                for (const auto &r : c.inputs) {
                    auto [it, fresh] = consumer.emplace(r, c.id);
                    if (!fresh) {
                        error(c.id, "region '" + r + "' already feeds component '" + it->second + "'");
                    }
                }
                for (const auto &r : c.outputs) {
                    auto [it, fresh] = producer.emplace(r, c.id);
                    if (!fresh) {
                        error(c.id, "region '" + r + "' is already fed by '" + it->second + "'");
                    }
                }
                for (const auto &r : c.inputs) {
                    if (std::find(c.outputs.begin(), c.outputs.end(), r) != c.outputs.end()) {
                        error(c.id, "component input and output coincide at '" + r + "'");
                    }
                }
            }
            switch (c.kind) {
                case ComponentKind::BeamSplitter:
                    if (c.inputs.size() != 2 || c.outputs.size() != 2) {
                        error(c.id, "beam splitter needs two inputs and two outputs");
                    }
                    break;
                case ComponentKind::Shutter:
                    if (!(c.response > 0.0) || !std::isfinite(c.response)) {
                        error(c.id, "shutter response time must be positive");
                    }
                    break;
                case ComponentKind::PhaseShifter:
                    if (!std::isfinite(c.phase)) {
                        error(c.id, "phase must be finite");
                    }
                    break;
                case ComponentKind::Screen: {
                    ++screens;
                    if (!c.screen) {
                        error(c.id, "screen parameters missing");
                        break;
                    }
                    const auto &sp = *c.screen;
                    for (auto [name, value] : {std::pair{"separation", sp.separation}, {"distance", sp.distance},
                                               {"wavelength", sp.wavelength}, {"sigma", sp.sigma},
                                               {"halfwidth", sp.halfwidth}}) {
                        if (!(value > 0.0) || !std::isfinite(value)) {
                            error(c.id, std::string("screen ") + name + " must be positive");
                        }
                    }
                    if (sp.bins < 2) {
                        error(c.id, "screen needs at least two bins");
                    }
                    if (c.inputs.size() != 2) {
                        error(c.id, "screen needs exactly two input regions");
                    }
                    break;
                }
                default:
                    break;
            }
        }
        if (screens > 1) {
            error("", "at most one screen is supported");
        }
    }

    void check_passages() {
        for (const auto &p : doc_.passages) {
            need_region(p.id, p.a);
            need_region(p.id, p.b);
            if (p.a == p.b) {
                error(p.id, "passage connects a region to itself");
            }
        }
    }

    void check_schedules() {
        std::map<std::string, std::vector<const ShutterTransition *>> by_shutter;
        for (const auto &t : doc_.shutter_transitions) {
            const auto *c = doc_.find_component(t.shutter);
            if (c == nullptr || c->kind != ComponentKind::Shutter) {
                error(t.shutter, "schedule targets '" + t.shutter + "', which is not a shutter");
                continue;
            }
            if (!std::isfinite(t.time) || t.time < 0.0) {
                error(t.shutter, "transition time must be finite and non-negative");
                continue;
            }
            by_shutter[t.shutter].push_back(&t);
        }
        for (auto &[id, list] : by_shutter) {
            std::stable_sort(list.begin(), list.end(), [](const auto *a, const auto *b) { return a->time < b->time; });
            bool closed = doc_.find_component(id)->initially_closed;
            for (const auto *t : list) {
                if (t->close == closed) {
                    warning(id, std::string("redundant ") + (t->close ? "close" : "open") + " at t=" +
                                    format_double(t->time) + " (shutter already " + (closed ? "closed" : "open") +
                                    ")");
                }
                closed = t->close;
            }
        }
        std::map<std::string, std::vector<const PockelsWindow *>> by_cell;
        for (const auto &w : doc_.pockels_windows) {
            const auto *c = doc_.find_component(w.cell);
            if (c == nullptr || c->kind != ComponentKind::PockelsCell) {
                error(w.cell, "voltage schedule targets '" + w.cell + "', which is not a pockels cell");
                continue;
            }
            if (!(w.on < w.off) || w.on < 0.0) {
                error(w.cell, "voltage window must satisfy 0 <= on < off");
                continue;
            }
            by_cell[w.cell].push_back(&w);
        }
        for (auto &[id, list] : by_cell) {
            std::sort(list.begin(), list.end(), [](const auto *a, const auto *b) { return a->on < b->on; });
            for (std::size_t k = 1; k < list.size(); ++k) {
                if (list[k]->on < list[k - 1]->off) {
                    error(id, "overlapping voltage windows");
                }
            }
        }
    }

    // Two shutters that must act between one packet's passages need the
    // fiber between them to outlast the mechanical response.
    void check_shutter_spacing() {
        std::map<std::string, const ComponentSpec *> consumer;
        for (const auto &c : doc_.components) {
            if (c.is_inline() || c.kind == ComponentKind::BeamSplitter) {
                for (const auto &r : c.inputs) {
                    consumer.emplace(r, &c);
                }
            }
        }
        for (const auto &start : doc_.components) {
            if (start.kind != ComponentKind::Shutter || !start.is_inline()) {
                continue;
            }
            double length = 0.0;
            std::string region = start.outputs.front();
            std::set<std::string> visited;
            while (visited.insert(region).second) {
                const auto *r = doc_.find_region(region);
                if (r == nullptr || !r->is_fiber()) {
                    break;
                }
                length += *r->length;
                auto it = consumer.find(region);
                if (it == consumer.end() || !it->second->is_inline()) {
                    break;
                }
                const auto *next = it->second;
                if (next->kind == ComponentKind::Shutter) {
                    double tau = std::max(start.response, next->response);
                    double need = tau * doc_.propagation_speed;
                    if (length < need) {
                        warning(start.id, "fiber between shutters " + start.id + " and " + next->id + " is " +
                                              format_double(length) + " m; a " + format_double(tau) +
                                              " s response needs at least " + format_double(need) + " m");
                    }
                    break;
                }
                region = next->outputs.front();
            }
        }
    }

    const SceneDoc &doc_;
    SceneReport report_;
};

}  // namespace

bool SceneReport::has_errors() const {
    return error_count() != 0;
}

std::size_t SceneReport::error_count() const {
    return static_cast<std::size_t>(
        std::count_if(issues.begin(), issues.end(), [](const auto &i) { return i.severity == Severity::Error; }));
}

std::size_t SceneReport::warning_count() const {
    return issues.size() - error_count();
}

SceneReport validate_scene(const SceneDoc &doc) {
    return Checker(doc).run();
}

}  // namespace topocollapse
