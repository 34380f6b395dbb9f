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

#include "topocollapse/timeline.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <sstream>

#include "topocollapse/error.h"

namespace topocollapse {

namespace {

constexpr std::size_t kNoLabels = std::numeric_limits<std::size_t>::max();

bool is_traversed(const ComponentSpec &c) {
    switch (c.kind) {
        case ComponentKind::Detector:
        case ComponentKind::Screen:
            return false;
        case ComponentKind::BeamSplitter:
            return c.inputs.size() == 2 && c.outputs.size() == 2;
        default:
            return c.is_inline();
    }
}

std::string join_violations(const std::vector<TimingViolation> &violations) {
    std::ostringstream out;
    for (std::size_t k = 0; k < violations.size(); ++k) {
        if (k != 0) {
            out << '\n';
        }
        const auto &v = violations[k];
        out << to_string(v.kind) << " violation at " << v.component << " (t=" << format_double(v.time)
            << " s): " << v.detail;
    }
    return out.str();
}

// Regions in an order where every component's inputs precede its outputs.
std::vector<std::string> topological_regions(const SceneDoc &scene) {
    std::map<std::string, std::size_t> indegree;
    std::map<std::string, std::vector<std::string>> next;
    for (const auto &r : scene.regions) {
        indegree[r.id] = 0;
    }
    for (const auto &c : scene.components) {
        if (!is_traversed(c)) {
            continue;
        }
        for (const auto &in : c.inputs) {
            for (const auto &out : c.outputs) {
                if (!indegree.count(in) || !indegree.count(out)) {
                    throw ConfigError("component '" + c.id + "' references an unknown region");
                }
                next[in].push_back(out);
                ++indegree[out];
            }
        }
    }
    std::queue<std::string> ready;
    for (const auto &r : scene.regions) {
        if (indegree[r.id] == 0) {
            ready.push(r.id);
        }
    }
    std::vector<std::string> order;
    while (!ready.empty()) {
        auto r = ready.front();
        ready.pop();
        order.push_back(r);
        for (const auto &n : next[r]) {
            if (--indegree[n] == 0) {
                ready.push(n);
            }
        }
    }
    if (order.size() != scene.regions.size()) {
        throw ConfigError("cyclic geometry: the component graph contains a loop");
    }
    return order;
}

int kind_rank(EventKind kind) {
    return static_cast<int>(kind);
}

std::set<Polarization> mode_polarizations(const SceneDoc &scene) {
    std::set<Polarization> pols;
    for (const auto &t : scene.source->terms) {
        pols.insert(t.polarization);
    }
    bool rotates = std::any_of(scene.components.begin(), scene.components.end(),
                               [](const auto &c) { return c.kind == ComponentKind::PockelsCell; });
    if (rotates) {
        pols = {Polarization::H, Polarization::V};
    }
    return pols;
}

BasisPtr build_basis(const SceneDoc &scene, const Timeline &tl) {
    std::set<std::string> used;
    for (const auto &[region, transit] : tl.transits) {
        used.insert(region);
    }
    for (const auto &e : tl.events) {
        if (e.kind != EventKind::Traverse) {
            continue;
        }
        const auto *c = scene.find_component(e.subject);
        used.insert(c->inputs.begin(), c->inputs.end());
        used.insert(c->outputs.begin(), c->outputs.end());
    }
    auto pols = mode_polarizations(scene);
    std::vector<Mode> modes;
    for (const auto &r : scene.regions) {
        if (!used.count(r.id)) {
            continue;
        }
        for (auto p : pols) {
            modes.push_back({r.id, r.path_label(), p});
        }
    }
    return make_basis(std::move(modes));
}

DensityMatrix build_initial(const SceneDoc &scene, const BasisPtr &basis) {
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis->size()));
    for (const auto &t : scene.source->terms) {
        const auto *r = scene.find_region(t.region);
        if (r == nullptr) {
            throw ConfigError("source references unknown region '" + t.region + "'");
        }
        auto k = basis->index_of({r->id, r->path_label(), t.polarization});
        psi(static_cast<Eigen::Index>(k)) += std::polar(t.amplitude, t.phase);
    }
    return to_density(PureState(basis, psi));
}

}  // namespace

std::string_view to_string(EventKind kind) {
    switch (kind) {
        case EventKind::ShutterClose:
            return "shutter-close";
        case EventKind::ShutterOpen:
            return "shutter-open";
        case EventKind::VoltageOn:
            return "voltage-on";
        case EventKind::VoltageOff:
            return "voltage-off";
        case EventKind::Emit:
            return "emit";
        case EventKind::Traverse:
            return "traverse";
        case EventKind::Detect:
            return "detect";
    }
    return "?";
}

bool event_before(const Event &a, const Event &b) {
    if (a.time != b.time) {
        return a.time < b.time;
    }
    if (a.kind != b.kind) {
        return kind_rank(a.kind) < kind_rank(b.kind);
    }
    return a.subject < b.subject;
}

std::string_view to_string(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::Contact:
            return "contact";
        case ViolationKind::Ordering:
            return "ordering";
        case ViolationKind::Pockels:
            return "pockels";
    }
    return "?";
}

TimingError::TimingError(std::vector<TimingViolation> violations)
    : std::runtime_error(join_violations(violations)), violations_(std::move(violations)) {}

double min_separation(double response_time, double speed) {
    if (!(response_time > 0.0) || !(speed > 0.0) || !std::isfinite(response_time) || !std::isfinite(speed)) {
        throw ConfigError("min_separation needs a positive response time and speed");
    }
    // Inputs are decimal quantities; rounding the product to 15 significant
    // digits drops the binary representation error (1e-6 * 10 -> 1e-5).
    std::array<char, 40> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), response_time * speed,
                                   std::chars_format::general, 15);
    double rounded = 0.0;
    std::from_chars(buf.data(), end, rounded);
    return rounded;
}

Timeline schedule(const SceneDoc &scene) {
    if (!scene.source) {
        throw ConfigError("scene has no source");
    }
    if (!(scene.propagation_speed > 0.0) || !std::isfinite(scene.propagation_speed)) {
        throw ConfigError("propagation speed must be positive");
    }
    if (!(scene.packet_duration > 0.0) || !std::isfinite(scene.packet_duration)) {
        throw ConfigError("packet duration must be positive");
    }
    for (const auto &r : scene.regions) {
        if (r.length && !(*r.length > 0.0 && std::isfinite(*r.length))) {
            throw ConfigError("fiber '" + r.id + "' has non-positive length " + format_double(*r.length));
        }
    }
    const auto order = topological_regions(scene);
    std::map<std::string, std::size_t> rank;
    for (std::size_t k = 0; k < order.size(); ++k) {
        rank[order[k]] = k;
    }

    Timeline tl;
    tl.propagation_speed = scene.propagation_speed;
    tl.packet_duration = scene.packet_duration;
    const double speed = scene.propagation_speed;
    const double tolerance = 1e-3 * scene.packet_duration;

    auto enter = [&](const std::string &region, double t) {
        const auto *r = scene.find_region(region);
        Transit tr;
        tr.enter = t;
        if (r != nullptr && r->length) {
            tr.exit = t + *r->length / speed;
        }
        tl.transits[region] = tr;
    };
    auto exit_of = [&](const std::string &region) -> std::optional<double> {
        auto it = tl.transits.find(region);
        if (it == tl.transits.end()) {
            return std::nullopt;
        }
        return it->second.exit;
    };

    const auto &src = *scene.source;
    for (const auto &t : src.terms) {
        enter(t.region, src.time);
    }
    tl.events.push_back({src.time, EventKind::Emit, src.id, src.time, src.time + scene.packet_duration});

    std::vector<const ComponentSpec *> traversed;
    for (const auto &c : scene.components) {
        if (is_traversed(c)) {
            traversed.push_back(&c);
        }
    }
    auto input_rank = [&](const ComponentSpec *c) {
        std::size_t r = 0;
        for (const auto &in : c->inputs) {
            r = std::max(r, rank.at(in));
        }
        return r;
    };
    std::stable_sort(traversed.begin(), traversed.end(),
                     [&](const auto *a, const auto *b) { return input_rank(a) < input_rank(b); });

    for (const auto *c : traversed) {
        std::optional<double> arrival;
        for (const auto &in : c->inputs) {
            auto t = exit_of(in);
            if (!t) {
                continue;
            }
            if (arrival && std::abs(*arrival - *t) > tolerance) {
                throw ConfigError("inputs of '" + c->id + "' arrive " + format_double(std::abs(*arrival - *t)) +
                                  " s apart; beam splitter inputs must coincide");
            }
            arrival = arrival ? std::min(*arrival, *t) : *t;
        }
        if (!arrival) {
            continue;
        }
        for (const auto &out : c->outputs) {
            enter(out, *arrival);
        }
        tl.events.push_back(
            {*arrival, EventKind::Traverse, c->id, *arrival, *arrival + scene.packet_duration});
    }

    double horizon = src.time;
    for (const auto &[region, tr] : tl.transits) {
        horizon = std::max(horizon, tr.exit.value_or(tr.enter));
    }
    for (const auto &c : scene.components) {
        if (c.kind != ComponentKind::Detector && c.kind != ComponentKind::Screen) {
            continue;
        }
        std::optional<double> t;
        for (const auto &in : c.inputs) {
            auto it = tl.transits.find(in);
            if (it != tl.transits.end()) {
                double reach = it->second.exit.value_or(horizon);
                t = t ? std::max(*t, reach) : reach;
            }
        }
        if (t) {
            tl.events.push_back({*t, EventKind::Detect, c.id, *t, *t + scene.packet_duration});
        }
    }

    for (const auto &c : scene.components) {
        if (c.kind == ComponentKind::Shutter) {
            tl.shutters[c.id] = {c.response, c.initially_closed};
        }
    }
    for (const auto &t : scene.shutter_transitions) {
        if (!tl.shutters.count(t.shutter)) {
            throw ConfigError("schedule targets unknown shutter '" + t.shutter + "'");
        }
        if (!(t.time >= 0.0) || !std::isfinite(t.time)) {
            throw ConfigError("transition time of '" + t.shutter + "' must be finite and non-negative");
        }
        tl.events.push_back({t.time, t.close ? EventKind::ShutterClose : EventKind::ShutterOpen, t.shutter, 0, 0});
    }
    for (const auto &w : scene.pockels_windows) {
        const auto *c = scene.find_component(w.cell);
        if (c == nullptr || c->kind != ComponentKind::PockelsCell) {
            throw ConfigError("voltage schedule targets unknown pockels cell '" + w.cell + "'");
        }
        if (!(w.on >= 0.0) || !(w.on < w.off) || !std::isfinite(w.off)) {
            throw ConfigError("voltage window of '" + w.cell + "' must satisfy 0 <= on < off");
        }
        tl.events.push_back({w.on, EventKind::VoltageOn, w.cell, 0, 0});
        tl.events.push_back({w.off, EventKind::VoltageOff, w.cell, 0, 0});
    }
    std::stable_sort(tl.events.begin(), tl.events.end(), event_before);
    return tl;
}

std::vector<TimingViolation> validate_timing(const Timeline &tl) {
    std::vector<TimingViolation> out;
    for (const auto &[id, info] : tl.shutters) {
        std::vector<const Event *> transitions;
        std::vector<const Event *> passages;
        for (const auto &e : tl.events) {
            if (e.subject != id) {
                continue;
            }
            if (e.kind == EventKind::ShutterClose || e.kind == EventKind::ShutterOpen) {
                transitions.push_back(&e);
            } else if (e.kind == EventKind::Traverse) {
                passages.push_back(&e);
            }
        }
        const double half = info.response / 2.0;
        for (const auto *t : transitions) {
            for (const auto *p : passages) {
                if (t->time - half <= p->trail && p->lead <= t->time + half) {
                    out.push_back({ViolationKind::Contact, id, t->time,
                                   std::string(to_string(t->kind)) + " window [" + format_double(t->time - half) +
                                       ", " + format_double(t->time + half) + "] overlaps packet window [" +
                                       format_double(p->lead) + ", " + format_double(p->trail) + "]"});
                }
            }
        }
        for (const auto *p : passages) {
            bool closed = info.initially_closed;
            for (const auto *t : transitions) {
                if (t->time < p->lead) {
                    closed = t->kind == EventKind::ShutterClose;
                }
            }
            if (closed) {
                out.push_back({ViolationKind::Ordering, id, p->lead, "packet reaches the shutter while it is closed"});
            }
        }
        if (!info.initially_closed && !transitions.empty() && transitions.back()->kind == EventKind::ShutterClose) {
            out.push_back({ViolationKind::Ordering, id, transitions.back()->time, "shutter closes and never reopens"});
        }
    }

    std::map<std::string, std::vector<std::pair<double, double>>> windows;
    std::map<std::string, double> pending;
    for (const auto &e : tl.events) {
        if (e.kind == EventKind::VoltageOn) {
            pending[e.subject] = e.time;
        } else if (e.kind == EventKind::VoltageOff) {
            auto it = pending.find(e.subject);
            if (it != pending.end()) {
                windows[e.subject].emplace_back(it->second, e.time);
                pending.erase(it);
            }
        }
    }
    for (const auto &e : tl.events) {
        if (e.kind != EventKind::Traverse || !windows.count(e.subject)) {
            continue;
        }
        for (const auto &[on, off] : windows[e.subject]) {
            bool overlaps = on < e.trail && e.lead < off;
            bool covers = on <= e.lead && e.trail <= off;
            if (overlaps && !covers) {
                out.push_back({ViolationKind::Pockels, e.subject, e.lead,
                               "voltage window [" + format_double(on) + ", " + format_double(off) +
                                   "] covers the packet only partially"});
            }
        }
    }
    return out;
}

Simulator::Simulator(const SceneDoc &scene)
    : scene_(scene),
      timeline_(schedule(scene)),
      basis_(build_basis(scene_, timeline_)),
      initial_(build_initial(scene_, basis_)) {
    auto violations = validate_timing(timeline_);
    if (!violations.empty()) {
        throw TimingError(std::move(violations));
    }
    const auto pols = mode_polarizations(scene_);
    const auto source_pol = scene_.source->terms.front().polarization;

    auto modes_of = [&](const std::vector<std::string> &regions) {
        std::vector<std::size_t> idx;
        for (const auto &r : regions) {
            const auto *spec = scene_.find_region(r);
            for (auto p : pols) {
                idx.push_back(basis_->index_of({r, spec->path_label(), p}));
            }
        }
        return idx;
    };
    auto pol_offset = [&](Polarization p) {
        return static_cast<Eigen::Index>(std::distance(pols.begin(), pols.find(p)));
    };
    const auto np = static_cast<Eigen::Index>(pols.size());

    auto transfer = [&](const ComponentSpec &c, bool voltage_on) {
        auto in = modes_of(c.inputs);
        auto out = modes_of(c.outputs);
        const auto n = static_cast<Eigen::Index>(in.size());
        Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(n, n);
        if (c.kind == ComponentKind::BeamSplitter) {
            const auto b = beam_splitter_unitary().matrix();
            for (Eigen::Index k = 0; k < 2; ++k) {
                for (Eigen::Index j = 0; j < 2; ++j) {
                    for (Eigen::Index p = 0; p < np; ++p) {
                        t(k * np + p, j * np + p) = b(k, j);
                    }
                }
            }
        } else if (c.kind == ComponentKind::PockelsCell && voltage_on) {
            for (auto p : pols) {
                t(pol_offset(flipped(p)), pol_offset(p)) = 1.0;
            }
        } else {
            Complex factor = c.kind == ComponentKind::PhaseShifter ? std::polar(1.0, c.phase) : Complex(1.0);
            for (Eigen::Index p = 0; p < np; ++p) {
                t(p, p) = factor;
            }
        }
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
        m.topRightCorner(n, n) = t.adjoint();
        m.bottomLeftCorner(n, n) = t;
        std::vector<std::size_t> support = in;
        support.insert(support.end(), out.begin(), out.end());
        unitaries_.emplace_back(std::move(support), m);
        return unitaries_.size() - 1;
    };

    auto collapse_labels = [&](const RegionGraph &g, Step &s) {
        for (auto &row : s.labels) {
            row.fill(kNoLabels);
        }
        auto strong = intern_labels(block_labels(*basis_, strong_partition(g)));
        for (auto p : {Polarization::H, Polarization::V}) {
            auto idx = static_cast<std::size_t>(p);
            s.labels[static_cast<std::size_t>(CollapsePolicy::PoV2Strong)][idx] = strong;
            s.labels[static_cast<std::size_t>(CollapsePolicy::PoV2Weak)][idx] =
                intern_labels(block_labels(*basis_, weak_partition(g, p)));
        }
    };

    std::map<std::string, bool> closed;
    for (const auto &[id, info] : timeline_.shutters) {
        closed[id] = info.initially_closed;
    }
    std::map<std::string, bool> voltage;
    for (const auto &e : timeline_.events) {
        switch (e.kind) {
            case EventKind::ShutterClose:
            case EventKind::ShutterOpen: {
                closed[e.subject] = e.kind == EventKind::ShutterClose;
                Step s;
                s.op = Step::Op::Collapse;
                s.pol = source_pol;
                s.time = e.time;
                s.subject = e.subject;
                collapse_labels(graph_with(closed), s);
                program_.push_back(std::move(s));
                break;
            }
            case EventKind::VoltageOn:
                voltage[e.subject] = true;
                break;
            case EventKind::VoltageOff:
                voltage[e.subject] = false;
                break;
            case EventKind::Traverse: {
                const auto &c = *scene_.find_component(e.subject);
                if (c.kind == ComponentKind::Polarizer) {
                    Step z;
                    z.op = Step::Op::Polarize;
                    z.time = e.time;
                    z.subject = c.id;
                    for (auto k : modes_of(c.inputs)) {
                        if ((*basis_)[k].polarization != c.axis) {
                            z.zeroed.push_back(k);
                        }
                    }
                    program_.push_back(std::move(z));
                }
                bool on = c.kind == ComponentKind::PockelsCell && voltage[c.id];
                Step s;
                s.op = Step::Op::Apply;
                s.unitary = transfer(c, on);
                s.time = e.time;
                s.subject = c.id;
                program_.push_back(std::move(s));
                if (on) {
                    Step w;
                    w.op = Step::Op::PockelsCollapse;
                    w.time = e.time;
                    w.subject = c.id;
                    for (auto k : modes_of(c.outputs)) {
                        w.watched[static_cast<std::size_t>((*basis_)[k].polarization)].push_back(k);
                    }
                    collapse_labels(graph_with(closed), w);
                    program_.push_back(std::move(w));
                }
                break;
            }
            case EventKind::Emit:
            case EventKind::Detect:
                break;
        }
    }
}

std::size_t Simulator::intern_labels(std::vector<std::size_t> labels) {
    for (std::size_t k = 0; k < label_sets_.size(); ++k) {
        if (label_sets_[k] == labels) {
            return k;
        }
    }
    label_sets_.push_back(std::move(labels));
    return label_sets_.size() - 1;
}

RegionGraph Simulator::graph_with(const std::map<std::string, bool> &closed) const {
    std::vector<std::string> regions;
    for (const auto &r : scene_.regions) {
        regions.push_back(r.id);
    }
    std::vector<Passage> passages;
    std::set<std::string> rotators;
    for (const auto &p : scene_.passages) {
        passages.push_back({p.a, p.b, p.condition});
    }
    for (const auto &c : scene_.components) {
        if (c.kind == ComponentKind::PockelsCell) {
            rotators.insert(c.location);
        }
        if (c.kind == ComponentKind::BeamSplitter) {
            for (const auto &in : c.inputs) {
                for (const auto &out : c.outputs) {
                    passages.push_back({in, out, PassCondition::open()});
                }
            }
            continue;
        }
        if (!c.is_inline() || c.kind == ComponentKind::Detector || c.kind == ComponentKind::Screen) {
            continue;
        }
        PassCondition cond = PassCondition::open();
        if (c.kind == ComponentKind::Polarizer) {
            cond = PassCondition::polarized_only(c.axis);
        } else if (c.kind == ComponentKind::Shutter) {
            auto it = closed.find(c.id);
            bool shut = it != closed.end() ? it->second : c.initially_closed;
            cond = shut ? PassCondition::closed() : PassCondition::open();
        }
        passages.push_back({c.inputs.front(), c.outputs.front(), cond});
    }
    return RegionGraph(std::move(regions), std::move(passages), std::move(rotators));
}

RegionGraph Simulator::graph_at(double t) const {
    std::map<std::string, bool> closed;
    for (const auto &[id, info] : timeline_.shutters) {
        closed[id] = info.initially_closed;
    }
    for (const auto &e : timeline_.events) {
        if (e.time > t) {
            break;
        }
        if (e.kind == EventKind::ShutterClose || e.kind == EventKind::ShutterOpen) {
            closed[e.subject] = e.kind == EventKind::ShutterClose;
        }
    }
    return graph_with(closed);
}

DensityMatrix Simulator::step(DensityMatrix rho, const Step &s, CollapsePolicy policy) const {
    const auto pi = static_cast<std::size_t>(policy);
    switch (s.op) {
        case Step::Op::Apply:
            return apply_unitary(std::move(rho), unitaries_[s.unitary]);
        case Step::Op::Polarize: {
            auto &m = rho.mutable_entries();
            double lost = 0.0;
            for (auto k : s.zeroed) {
                auto i = static_cast<Eigen::Index>(k);
                lost += m(i, i).real();
                m.row(i).setZero();
                m.col(i).setZero();
            }
            rho.add_deficit(lost);
            return rho;
        }
        case Step::Op::Collapse: {
            auto idx = s.labels[pi][static_cast<std::size_t>(s.pol)];
            return idx == kNoLabels ? rho : dephase_by_labels(std::move(rho), label_sets_[idx]);
        }
        case Step::Op::PockelsCollapse: {
            std::array<double, 2> weight{0.0, 0.0};
            for (std::size_t p = 0; p < 2; ++p) {
                for (auto k : s.watched[p]) {
                    auto i = static_cast<Eigen::Index>(k);
                    weight[p] += rho.entries()(i, i).real();
                }
            }
            auto dominant = weight[1] > weight[0] ? Polarization::V : Polarization::H;
            auto idx = s.labels[pi][static_cast<std::size_t>(dominant)];
            return idx == kNoLabels ? rho : dephase_by_labels(std::move(rho), label_sets_[idx]);
        }
    }
    return rho;
}

DensityMatrix Simulator::execute(CollapsePolicy policy) const {
    DensityMatrix rho = initial_;
    for (const auto &s : program_) {
        rho = step(std::move(rho), s, policy);
    }
    return rho;
}

RunRecord Simulator::run(CollapsePolicy policy) const {
    std::map<std::string, bool> closed;
    for (const auto &[id, info] : timeline_.shutters) {
        closed[id] = info.initially_closed;
    }
    double start = timeline_.events.empty() ? 0.0 : timeline_.events.front().time;
    RunRecord record{execute(policy), {{start, graph_with(closed)}}};
    for (const auto &e : timeline_.events) {
        if (e.kind == EventKind::ShutterClose || e.kind == EventKind::ShutterOpen) {
            closed[e.subject] = e.kind == EventKind::ShutterClose;
            record.history.push_back({e.time, graph_with(closed)});
        }
    }
    return record;
}

RunRecord run(const SceneDoc &scene, CollapsePolicy policy) {
    return Simulator(scene).run(policy);
}

}  // namespace topocollapse
