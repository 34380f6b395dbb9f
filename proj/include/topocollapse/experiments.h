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

#ifndef TOPOCOLLAPSE_EXPERIMENTS_H
#define TOPOCOLLAPSE_EXPERIMENTS_H

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "topocollapse/collapse.h"
#include "topocollapse/scene.h"

namespace topocollapse {

enum class PresetKind { Fig1, Fig2, Fig3, Fig4, Fig5 };

inline constexpr PresetKind kAllPresets[] = {PresetKind::Fig1, PresetKind::Fig2, PresetKind::Fig3, PresetKind::Fig4,
                                             PresetKind::Fig5};

/// "fig1" .. "fig5".
std::string_view to_string(PresetKind kind);
std::optional<PresetKind> parse_preset(std::string_view text);

/// Preset kind recorded in a scene's metadata, if any.
std::optional<PresetKind> preset_of(const SceneDoc &scene);

ScreenParams default_screen();

struct PresetParams {
    double phi = 0.0;

    // fig1 box amplitudes.
    Complex alpha = M_SQRT1_2;
    Complex beta = M_SQRT1_2;

    // fig3 / fig4: fiber between shutters A and B, shutter response, and
    // where the close/open instant sits in the gap between the packet
    // leaving A and reaching B (0.5 is the midpoint).
    double fiber_length = 600.0;
    double response = 1e-6;
    double close_fraction = 0.5;

    // fig5 segment lengths and the margin of each voltage window around the
    // packet's passage through its Pockels cell.
    double l1 = 300.0;
    double l2 = 300.0;
    double l3 = 300.0;
    double pockels_margin = 10e-9;

    double speed = kSpeedOfLight;
    double packet_duration = kDefaultPacketDuration;
    ScreenParams screen = default_screen();
};

/// Throws ConfigError for out-of-range parameters.
SceneDoc preset(PresetKind kind, const PresetParams &params = {});

/// Copy of the scene with every phase shifter set to phi.
SceneDoc with_phase(SceneDoc scene, double phi);

/// Phase of the scene's first phase shifter, if it has one.
std::optional<double> scene_phase(const SceneDoc &scene);

struct AnalyticPrediction {
    CollapsePolicy policy = CollapsePolicy::PoV1;
    std::vector<std::pair<std::string, double>> detector_probs;  // includes "loss"
    std::function<double(double)> screen_density;                // empty unless a screen exists
    double visibility = 0.0;

    double probability(std::string_view outcome) const;
};

/// Strong-disconnection interferometer: both PoV2 policies dephase.
AnalyticPrediction analytic_mz(double phi, CollapsePolicy policy);

/// Weak-disconnection interferometer: only the weak policy dephases.
AnalyticPrediction analytic_weak_mz(double phi, CollapsePolicy policy);

/// Single-slit amplitude on the screen; slit 0 sits at +d/2, slit 1 at -d/2.
Complex screen_amplitude(int slit, double r, const ScreenParams &params);

/// Screen density for equal slit weights. PoV1 keeps the interference term.
double analytic_screen(double r, const ScreenParams &params, CollapsePolicy policy);

/// Binned screen densities on [-halfwidth, halfwidth] for an arbitrary 2x2
/// slit-space density matrix.
class ScreenModel {
   public:
    explicit ScreenModel(const ScreenParams &params);

    const ScreenParams &params() const {
        return params_;
    }
    std::vector<double> bin_edges() const;

    double density(const Eigen::Matrix2cd &rho, double r) const;
    /// Unnormalized probability mass in each bin.
    std::vector<double> bin_masses(const Eigen::Matrix2cd &rho) const;

    static Eigen::Matrix2cd policy_state(CollapsePolicy policy);

   private:
    ScreenParams params_;
    std::vector<Eigen::Matrix2cd> integrals_;  // integral of A_j conj(A_k) over each bin
};

/// Slit-space density matrix from a final state: the two screen input
/// regions, summed over polarization.
Eigen::Matrix2cd screen_state(const DensityMatrix &rho, const SceneDoc &scene);

/// Mean distance between adjacent local maxima of f sampled on a uniform grid.
double fringe_spacing(const std::function<double(double)> &f, double lo, double hi, std::size_t points);

/// (max - min) / (max + min). Throws std::domain_error with fewer than two
/// samples or when every sample is zero.
double visibility(const std::vector<double> &samples);

/// Probability per outcome label (path labels, then "loss"). Preset scenes
/// use their closed forms; other scenes use the exact Born probabilities.
std::vector<double> analytic_outcomes(const SceneDoc &scene, CollapsePolicy policy,
                                      const std::vector<std::string> &outcomes);

}  // namespace topocollapse

#endif
