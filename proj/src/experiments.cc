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

#include "topocollapse/experiments.h"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <map>
#include <stdexcept>

#include "topocollapse/error.h"
#include "topocollapse/timeline.h"

namespace topocollapse {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
constexpr std::size_t kVisibilityGrid = 16;

class Builder {
   public:
    explicit Builder(std::string name) {
        doc_.name = std::move(name);
    }

    void region(const std::string &id, const std::string &path) {
        doc_.regions.push_back({id, path, std::nullopt});
    }
    void fiber(const std::string &id, const std::string &path, double length) {
        doc_.regions.push_back({id, path, length});
    }
    ComponentSpec &between(ComponentKind kind, const std::string &id, const std::string &a, const std::string &b) {
        ComponentSpec c;
        c.kind = kind;
        c.id = id;
        c.location = a;
        c.inputs = {a};
        c.outputs = {b};
        doc_.components.push_back(std::move(c));
        return doc_.components.back();
    }
    void splitter(const std::string &id, const std::string &in0, const std::string &in1, const std::string &out0,
                  const std::string &out1) {
        ComponentSpec c;
        c.kind = ComponentKind::BeamSplitter;
        c.id = id;
        c.location = in0;
        c.inputs = {in0, in1};
        c.outputs = {out0, out1};
        doc_.components.push_back(std::move(c));
    }
    void detector(const std::string &id, const std::string &region) {
        ComponentSpec c;
        c.kind = ComponentKind::Detector;
        c.id = id;
        c.location = region;
        c.inputs = {region};
        doc_.components.push_back(std::move(c));
    }
    void rotator(const std::string &id, const std::string &region) {
        ComponentSpec c;
        c.kind = ComponentKind::PockelsCell;
        c.id = id;
        c.location = region;
        doc_.components.push_back(std::move(c));
    }
    SceneDoc &doc() {
        return doc_;
    }

   private:
    SceneDoc doc_;
};

void require(bool ok, const std::string &message) {
    if (!ok) {
        throw ConfigError(message);
    }
}

bool positive(double v) {
    return v > 0.0 && std::isfinite(v);
}

void check_common(const PresetParams &p) {
    require(std::isfinite(p.phi), "phi must be finite");
    require(positive(p.speed), "propagation speed must be positive");
    require(positive(p.packet_duration), "packet duration must be positive");
}

void check_screen(const ScreenParams &s) {
    require(positive(s.separation) && positive(s.distance) && positive(s.wavelength) && positive(s.sigma) &&
                positive(s.halfwidth),
            "screen parameters must be positive");
    require(s.bins >= 2, "screen needs at least two bins");
}

void finish(SceneDoc &doc, PresetKind kind, const PresetParams &p) {
    doc.propagation_speed = p.speed;
    doc.packet_duration = p.packet_duration;
    doc.metadata["preset"] = std::string(to_string(kind));
}

double traverse_time(const Timeline &tl, const std::string &component) {
    for (const auto &e : tl.events) {
        if (e.kind == EventKind::Traverse && e.subject == component) {
            return e.time;
        }
    }
    throw ConfigError("packet never reaches '" + component + "'");
}

// Close and reopen shutters a and b together while the packet is between them.
void add_shutter_cycle(SceneDoc &doc, const PresetParams &p) {
    require(positive(p.response), "shutter response must be positive");
    require(p.close_fraction > 0.0 && p.close_fraction < 1.0, "close fraction must lie in (0, 1)");
    auto tl = schedule(doc);
    double leave_a = traverse_time(tl, "A") + p.packet_duration;
    double reach_b = traverse_time(tl, "B");
    double t = leave_a + p.close_fraction * (reach_b - leave_a);
    doc.shutter_transitions = {{"A", true, t}, {"B", true, t}, {"A", false, t}, {"B", false, t}};
}

SceneDoc build_fig1(const PresetParams &p) {
    double norm = std::norm(p.alpha) + std::norm(p.beta);
    require(std::isfinite(norm) && std::abs(norm - 1.0) <= kAlgebraicTolerance, "fig1 needs |alpha|^2 + |beta|^2 = 1");
    Builder b("fig1");
    b.region("box1", "psi1");
    b.region("box2", "psi2");
    b.doc().source = SourceSpec{"S0",
                                {{"box1", Polarization::V, std::abs(p.alpha), std::arg(p.alpha)},
                                 {"box2", Polarization::V, std::abs(p.beta), std::arg(p.beta)}},
                                0.0};
    b.between(ComponentKind::Shutter, "S", "box1", "box2").response = 1e-6;
    b.detector("D", "box1");
    b.doc().shutter_transitions = {{"S", true, 1e-6}, {"S", false, 2e-6}};
    return b.doc();
}

SceneDoc build_fig2() {
    Builder b("fig2");
    b.region("c1", "c1");
    b.region("gap", "gap");
    b.region("c2", "c2");
    b.doc().source = SourceSpec{
        "S0", {{"c1", Polarization::V, M_SQRT1_2, 0.0}, {"c2", Polarization::H, M_SQRT1_2, 0.0}}, 0.0};
    b.between(ComponentKind::Polarizer, "PV", "c1", "gap").axis = Polarization::V;
    b.between(ComponentKind::Polarizer, "PH", "gap", "c2").axis = Polarization::H;
    b.rotator("R1", "c1");
    b.rotator("R2", "gap");
    b.rotator("R3", "c2");
    return b.doc();
}

SceneDoc build_fig3(const PresetParams &p) {
    require(positive(p.fiber_length), "fiber length must be positive");
    check_screen(p.screen);
    const double l = p.fiber_length;
    Builder b("fig3");
    b.fiber("s0", "s", 10.0);
    b.fiber("vac", "v", 10.0);
    b.fiber("f1a", "slit1", 10.0);
    b.fiber("f1b", "slit1", l);
    b.fiber("f1c", "slit1", 10.0);
    b.fiber("f2a", "slit2", l + 20.0);
    b.doc().source = SourceSpec{"S0", {{"s0", Polarization::V, 1.0, 0.0}}, 0.0};
    b.splitter("slits", "s0", "vac", "f1a", "f2a");
    b.between(ComponentKind::Shutter, "A", "f1a", "f1b").response = p.response;
    b.between(ComponentKind::Shutter, "B", "f1b", "f1c").response = p.response;
    ComponentSpec screen;
    screen.kind = ComponentKind::Screen;
    screen.id = "screen";
    screen.location = "f1c";
    screen.inputs = {"f1c", "f2a"};
    screen.screen = p.screen;
    b.doc().components.push_back(screen);
    finish(b.doc(), PresetKind::Fig3, p);
    add_shutter_cycle(b.doc(), p);
    return b.doc();
}

SceneDoc build_fig4(const PresetParams &p) {
    require(positive(p.fiber_length), "fiber length must be positive");
    const double l = p.fiber_length;
    Builder b("fig4");
    b.fiber("src", "x", 10.0);
    b.fiber("vac", "y", 10.0);
    b.fiber("xa", "x", 10.0);
    b.fiber("xb", "x", 10.0);
    b.fiber("xc", "x", l);
    b.fiber("xd", "x", 10.0);
    b.fiber("xe", "x", 10.0);
    b.fiber("ya", "y", l + 30.0);
    b.fiber("yb", "y", 10.0);
    b.fiber("ox", "x", 10.0);
    b.fiber("oy", "y", 10.0);
    b.doc().source = SourceSpec{"S0", {{"src", Polarization::V, 1.0, 0.0}}, 0.0};
    b.splitter("BS1", "src", "vac", "xa", "ya");
    b.between(ComponentKind::PhaseShifter, "PS", "xa", "xb").phase = p.phi;
    b.between(ComponentKind::Shutter, "A", "xb", "xc").response = p.response;
    b.between(ComponentKind::Shutter, "B", "xc", "xd").response = p.response;
    b.between(ComponentKind::Mirror, "Mx", "xd", "xe");
    b.between(ComponentKind::Mirror, "My", "ya", "yb");
    b.splitter("BS2", "xe", "yb", "ox", "oy");
    b.detector("Dx", "ox");
    b.detector("Dy", "oy");
    finish(b.doc(), PresetKind::Fig4, p);
    b.doc().metadata["phase_path"] = "x";
    add_shutter_cycle(b.doc(), p);
    return b.doc();
}

SceneDoc build_fig5(const PresetParams &p) {
    require(positive(p.l1) && positive(p.l2) && positive(p.l3), "segment lengths must be positive");
    require(positive(p.pockels_margin), "pockels margin must be positive");
    Builder b("fig5");
    b.fiber("src", "x", 10.0);
    b.fiber("vac", "y", 10.0);
    b.fiber("xa", "x", 10.0);
    b.fiber("xb", "x", 10.0 + p.l1 + p.l2 + p.l3);
    b.fiber("xc", "x", 10.0);
    b.fiber("ya", "y", 10.0);
    b.fiber("yb", "y", p.l1);
    b.fiber("yc", "y", p.l2);
    b.fiber("yd", "y", p.l3);
    b.fiber("ye", "y", 10.0);
    b.fiber("yf", "y", 10.0);
    b.fiber("ox", "x", 10.0);
    b.fiber("oy", "y", 10.0);
    b.doc().source = SourceSpec{"S0", {{"src", Polarization::V, 1.0, 0.0}}, 0.0};
    b.splitter("BS1", "src", "vac", "xa", "ya");
    b.between(ComponentKind::PhaseShifter, "PS", "xa", "xb").phase = p.phi;
    b.between(ComponentKind::Mirror, "Mx", "xb", "xc");
    b.between(ComponentKind::Polarizer, "P1", "ya", "yb").axis = Polarization::V;
    b.between(ComponentKind::PockelsCell, "PC1", "yb", "yc");
    b.between(ComponentKind::PockelsCell, "PC2", "yc", "yd");
    b.between(ComponentKind::Polarizer, "P2", "yd", "ye").axis = Polarization::V;
    b.between(ComponentKind::Mirror, "My", "ye", "yf");
    b.splitter("BS2", "xc", "yf", "ox", "oy");
    b.detector("Dx", "ox");
    b.detector("Dy", "oy");
    finish(b.doc(), PresetKind::Fig5, p);
    b.doc().metadata["phase_path"] = "x";
    auto tl = schedule(b.doc());
    for (const std::string cell : {"PC1", "PC2"}) {
        double t = traverse_time(tl, cell);
        double on = t - p.pockels_margin;
        require(on >= 0.0, "pockels margin exceeds the packet's arrival time");
        b.doc().pockels_windows.push_back({cell, on, t + p.packet_duration + p.pockels_margin});
    }
    return b.doc();
}

double px_coherent(double phi) {
    return 0.25 * std::norm(std::polar(1.0, phi) - 1.0);
}

AnalyticPrediction mz_prediction(double phi, CollapsePolicy policy, bool dephased) {
    AnalyticPrediction out;
    out.policy = policy;
    double px = dephased ? 0.5 : px_coherent(phi);
    out.detector_probs = {{"x", px}, {"y", 1.0 - px}, {"loss", 0.0}};
    std::vector<double> grid;
    for (std::size_t k = 0; k < kVisibilityGrid; ++k) {
        grid.push_back(dephased ? 0.5 : px_coherent(kTwoPi * static_cast<double>(k) / kVisibilityGrid));
    }
    out.visibility = visibility(grid);
    return out;
}

}  // namespace

std::string_view to_string(PresetKind kind) {
    switch (kind) {
        case PresetKind::Fig1:
            return "fig1";
        case PresetKind::Fig2:
            return "fig2";
        case PresetKind::Fig3:
            return "fig3";
        case PresetKind::Fig4:
            return "fig4";
        case PresetKind::Fig5:
            return "fig5";
    }
    return "?";
}

std::optional<PresetKind> parse_preset(std::string_view text) {
    for (auto k : kAllPresets) {
        if (to_string(k) == text) {
            return k;
        }
    }
    return std::nullopt;
}

std::optional<PresetKind> preset_of(const SceneDoc &scene) {
    auto it = scene.metadata.find("preset");
    if (it == scene.metadata.end()) {
        return std::nullopt;
    }
    return parse_preset(it->second);
}

ScreenParams default_screen() {
    ScreenParams s;
    s.separation = 5e-4;
    s.distance = 1.0;
    s.wavelength = 5e-7;
    s.sigma = 7.5e-3;
    s.halfwidth = 7.5e-4;
    s.bins = 64;
    return s;
}

SceneDoc preset(PresetKind kind, const PresetParams &params) {
    check_common(params);
    SceneDoc doc;
    switch (kind) {
        case PresetKind::Fig1:
            doc = build_fig1(params);
            break;
        case PresetKind::Fig2:
            doc = build_fig2();
            break;
        case PresetKind::Fig3:
            return build_fig3(params);
        case PresetKind::Fig4:
            return build_fig4(params);
        case PresetKind::Fig5:
            return build_fig5(params);
    }
    finish(doc, kind, params);
    return doc;
}

SceneDoc with_phase(SceneDoc scene, double phi) {
    for (auto &c : scene.components) {
        if (c.kind == ComponentKind::PhaseShifter) {
            c.phase = phi;
        }
    }
    return scene;
}

std::optional<double> scene_phase(const SceneDoc &scene) {
    for (const auto &c : scene.components) {
        if (c.kind == ComponentKind::PhaseShifter) {
            return c.phase;
        }
    }
    return std::nullopt;
}

double AnalyticPrediction::probability(std::string_view outcome) const {
    for (const auto &[label, p] : detector_probs) {
        if (label == outcome) {
            return p;
        }
    }
    return 0.0;
}

AnalyticPrediction analytic_mz(double phi, CollapsePolicy policy) {
    return mz_prediction(phi, policy, policy != CollapsePolicy::PoV1);
}

AnalyticPrediction analytic_weak_mz(double phi, CollapsePolicy policy) {
    return mz_prediction(phi, policy, policy == CollapsePolicy::PoV2Weak);
}

Complex screen_amplitude(int slit, double r, const ScreenParams &params) {
    const double offset = slit == 0 ? r - params.separation / 2.0 : r + params.separation / 2.0;
    const double d = params.distance;
    const double ell = std::sqrt(d * d + offset * offset);
    // Path length minus D, written to avoid cancellation; the dropped common
    // phase does not affect any density.
    const double excess = offset * offset / (ell + d);
    const double envelope = std::pow(2.0 * M_PI * params.sigma * params.sigma, -0.25) *
                            std::exp(-r * r / (4.0 * params.sigma * params.sigma));
    return std::polar(envelope, kTwoPi * excess / params.wavelength);
}

double analytic_screen(double r, const ScreenParams &params, CollapsePolicy policy) {
    const auto a1 = screen_amplitude(0, r, params);
    const auto a2 = screen_amplitude(1, r, params);
    double density = 0.5 * std::norm(a1) + 0.5 * std::norm(a2);
    if (policy == CollapsePolicy::PoV1) {
        density += (a1 * std::conj(a2)).real();
    }
    return density;
}

ScreenModel::ScreenModel(const ScreenParams &params) : params_(params) {
    if (!(params.halfwidth > 0.0) || params.bins < 1 || !(params.sigma > 0.0) || !(params.wavelength > 0.0) ||
        !(params.distance > 0.0)) {
        throw ConfigError("screen model needs positive geometry and at least one bin");
    }
    using Quadrature = boost::math::quadrature::gauss<double, 20>;
    const auto edges = bin_edges();
    integrals_.reserve(static_cast<std::size_t>(params.bins));
    for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
        Eigen::Matrix2cd m;
        for (int j = 0; j < 2; ++j) {
            for (int k = j; k < 2; ++k) {
                auto part = [&](bool imag) {
                    return Quadrature::integrate(
                        [&](double r) {
                            auto v = screen_amplitude(j, r, params_) * std::conj(screen_amplitude(k, r, params_));
                            return imag ? v.imag() : v.real();
                        },
                        edges[b], edges[b + 1]);
                };
                m(j, k) = Complex(part(false), j == k ? 0.0 : part(true));
                m(k, j) = std::conj(m(j, k));
            }
        }
        integrals_.push_back(m);
    }
}

std::vector<double> ScreenModel::bin_edges() const {
    std::vector<double> edges(static_cast<std::size_t>(params_.bins) + 1);
    const double w = params_.halfwidth;
    for (std::size_t k = 0; k < edges.size(); ++k) {
        edges[k] = -w + 2.0 * w * static_cast<double>(k) / params_.bins;
    }
    edges.back() = w;
    return edges;
}

double ScreenModel::density(const Eigen::Matrix2cd &rho, double r) const {
    const Complex a[2] = {screen_amplitude(0, r, params_), screen_amplitude(1, r, params_)};
    double out = 0.0;
    for (int j = 0; j < 2; ++j) {
        for (int k = 0; k < 2; ++k) {
            out += (rho(j, k) * a[j] * std::conj(a[k])).real();
        }
    }
    return out;
}

std::vector<double> ScreenModel::bin_masses(const Eigen::Matrix2cd &rho) const {
    std::vector<double> out;
    out.reserve(integrals_.size());
    for (const auto &m : integrals_) {
        double mass = 0.0;
        for (int j = 0; j < 2; ++j) {
            for (int k = 0; k < 2; ++k) {
                mass += (rho(j, k) * m(j, k)).real();
            }
        }
        out.push_back(std::max(mass, 0.0));
    }
    return out;
}

Eigen::Matrix2cd ScreenModel::policy_state(CollapsePolicy policy) {
    Eigen::Matrix2cd rho;
    double coherence = policy == CollapsePolicy::PoV1 ? 0.5 : 0.0;
    rho << 0.5, coherence, coherence, 0.5;
    return rho;
}

Eigen::Matrix2cd screen_state(const DensityMatrix &rho, const SceneDoc &scene) {
    const auto *screen = scene.screen();
    if (screen == nullptr || screen->inputs.size() != 2) {
        throw ConfigError("scene has no two-input screen");
    }
    const auto &basis = *rho.basis();
    Eigen::Matrix2cd out = Eigen::Matrix2cd::Zero();
    for (auto pol : {Polarization::H, Polarization::V}) {
        std::optional<std::size_t> idx[2];
        for (int j = 0; j < 2; ++j) {
            const auto *region = scene.find_region(screen->inputs[static_cast<std::size_t>(j)]);
            if (region != nullptr) {
                idx[j] = basis.find({region->id, region->path_label(), pol});
            }
        }
        for (int j = 0; j < 2; ++j) {
            for (int k = 0; k < 2; ++k) {
                if (idx[j] && idx[k]) {
                    out(j, k) += rho.entries()(static_cast<Eigen::Index>(*idx[j]), static_cast<Eigen::Index>(*idx[k]));
                }
            }
        }
    }
    return out;
}

double fringe_spacing(const std::function<double(double)> &f, double lo, double hi, std::size_t points) {
    if (points < 3 || !(hi > lo)) {
        throw ConfigError("fringe_spacing needs at least three points on a non-empty interval");
    }
    const double step = (hi - lo) / static_cast<double>(points - 1);
    std::vector<double> v(points);
    for (std::size_t k = 0; k < points; ++k) {
        v[k] = f(lo + step * static_cast<double>(k));
    }
    std::vector<double> peaks;
    for (std::size_t k = 1; k + 1 < points; ++k) {
        if (v[k] > v[k - 1] && v[k] >= v[k + 1]) {
            // Parabolic refinement through the three samples.
            double denom = v[k - 1] - 2.0 * v[k] + v[k + 1];
            double shift = denom != 0.0 ? 0.5 * (v[k - 1] - v[k + 1]) / denom : 0.0;
            peaks.push_back(lo + step * (static_cast<double>(k) + shift));
        }
    }
    if (peaks.size() < 2) {
        throw std::domain_error("fewer than two maxima in the sampled range");
    }
    return (peaks.back() - peaks.front()) / static_cast<double>(peaks.size() - 1);
}

double visibility(const std::vector<double> &samples) {
    if (samples.size() < 2) {
        throw std::domain_error("visibility needs at least two samples");
    }
    auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
    if (*hi + *lo <= 0.0) {
        throw std::domain_error("visibility is undefined for all-zero samples");
    }
    return (*hi - *lo) / (*hi + *lo);
}

std::vector<double> analytic_outcomes(const SceneDoc &scene, CollapsePolicy policy,
                                      const std::vector<std::string> &outcomes) {
    std::map<std::string, double> probs;
    auto kind = preset_of(scene);
    if (kind == PresetKind::Fig4 || kind == PresetKind::Fig5) {
        double phi = scene_phase(scene).value_or(0.0);
        auto pred = kind == PresetKind::Fig4 ? analytic_mz(phi, policy) : analytic_weak_mz(phi, policy);
        for (const auto &[label, p] : pred.detector_probs) {
            probs[label] = p;
        }
    } else if ((kind == PresetKind::Fig1 || kind == PresetKind::Fig2) && scene.source) {
        for (const auto &t : scene.source->terms) {
            const auto *r = scene.find_region(t.region);
            probs[r != nullptr ? r->path_label() : t.region] += t.amplitude * t.amplitude;
        }
        probs["loss"] = 0.0;
    } else {
        Simulator sim(scene);
        auto rho = sim.execute(policy);
        const auto &basis = *rho.basis();
        for (std::size_t k = 0; k < basis.size(); ++k) {
            probs[basis[k].path] += born_probability(rho, k);
        }
        probs["loss"] = rho.norm_deficit();
    }
    std::vector<double> out;
    out.reserve(outcomes.size());
    for (const auto &o : outcomes) {
        auto it = probs.find(o);
        out.push_back(it == probs.end() ? 0.0 : it->second);
    }
    return out;
}

}  // namespace topocollapse
