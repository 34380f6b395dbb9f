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

#ifndef TOPOCOLLAPSE_MONTECARLO_H
#define TOPOCOLLAPSE_MONTECARLO_H

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "topocollapse/collapse.h"
#include "topocollapse/scene.h"

namespace topocollapse {

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Counter-based generator: output k of stream s under seed is a pure
/// function of (seed, s, k), so any trial's draws can be reproduced alone.
class CounterRng {
   public:
    CounterRng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next();
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();

    std::uint64_t counter() const {
        return counter_;
    }

   private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

struct SampledOutcome {
    bool loss = false;
    std::size_t mode = 0;  // valid when !loss

    bool operator==(const SampledOutcome &) const = default;
};

/// Inverse-CDF draw over the diagonal in basis order, then the norm deficit.
/// Throws std::domain_error when the diagonal is not a distribution.
SampledOutcome sample_outcome(const DensityMatrix &rho, CounterRng &rng);

struct RunConfig {
    std::uint64_t trials = 1;
    std::uint64_t seed = 0;
    CollapsePolicy policy = CollapsePolicy::PoV1;
    std::vector<double> sweep;  // phase grid for run_sweep
    int bins = 0;               // 0 keeps the scene's screen bin count
};

struct ExperimentResult {
    CollapsePolicy policy = CollapsePolicy::PoV1;
    std::uint64_t seed = 0;
    std::uint64_t trials = 0;
    std::optional<double> phi;
    std::vector<std::string> outcomes;  // path labels or bin names, then "loss"
    std::vector<std::uint64_t> counts;
    std::vector<double> analytic;       // per outcome, may be empty
    double visibility = 0.0;            // over screen bins; 0 for detector runs

    std::vector<double> frequencies() const;
    std::uint64_t count(std::string_view outcome) const;
};

/// Outcome labels of a scene: distinct path labels in basis order, then "loss".
std::vector<std::string> outcome_labels(const SceneDoc &scene);

/// One timeline execution and one sampled outcome per trial; trial k draws
/// from stream k of cfg.seed.
ExperimentResult run_trials(const RunConfig &cfg, const SceneDoc &scene);

/// Screen bin per trial, sampled from the binned density of that trial's
/// final state. Throws ConfigError when the scene has no screen.
ExperimentResult screen_histogram(const RunConfig &cfg, const SceneDoc &scene);

/// Seed used for sweep point k.
std::uint64_t sweep_seed(std::uint64_t seed, std::size_t point);

/// Uniform grid 2 pi k / n, k = 0 .. n-1.
std::vector<double> phase_grid(std::size_t points);

/// One run_trials per cfg.sweep entry. threads == 0 picks the hardware count;
/// results do not depend on the thread count.
std::vector<ExperimentResult> run_sweep(const RunConfig &cfg, const SceneDoc &scene, unsigned threads = 0);

/// Visibility of one outcome's counts across sweep points.
double sweep_visibility(const std::vector<ExperimentResult> &results, std::string_view outcome);

struct ChiSquare {
    double statistic = 0.0;
    std::size_t dof = 0;
    double p_value = 1.0;
};

/// Pearson test of counts against probabilities. Adjacent cells are pooled
/// until every pooled expectation reaches min_expected.
ChiSquare chi_square_test(const std::vector<std::uint64_t> &counts, const std::vector<double> &probabilities,
                          double min_expected = 5.0);

}  // namespace topocollapse

#endif
