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

#include "topocollapse/montecarlo.h"

#include <algorithm>
#include <atomic>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "topocollapse/error.h"
#include "topocollapse/experiments.h"
#include "topocollapse/timeline.h"

namespace topocollapse {

namespace {

constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

void check_state(const DensityMatrix &rho) {
    auto violations = validate(rho);
    if (!violations.empty()) {
        throw std::domain_error("invalid final state: " + violations.front().detail);
    }
}

std::size_t sample_index(const std::vector<double> &cumulative, double u) {
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) {
        // u landed in the rounding gap above the last cumulative value.
        it = std::prev(cumulative.end());
        while (it != cumulative.begin() && *it == *std::prev(it)) {
            --it;
        }
    }
    return static_cast<std::size_t>(std::distance(cumulative.begin(), it));
}

void check_config(const RunConfig &cfg) {
    if (cfg.trials < 1) {
        throw ConfigError("trials must be at least 1");
    }
    for (double phi : cfg.sweep) {
        if (!std::isfinite(phi)) {
            throw ConfigError("sweep values must be finite");
        }
    }
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(mix64(seed + kGamma) ^ (stream * kGamma + 0x632be59bd9b4e019ULL))) {}

std::uint64_t CounterRng::next() {
    ++counter_;
    return mix64(key_ + counter_ * kGamma);
}

double CounterRng::uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

SampledOutcome sample_outcome(const DensityMatrix &rho, CounterRng &rng) {
    const auto &m = rho.entries();
    const auto n = static_cast<std::size_t>(m.rows());
    double total = rho.norm_deficit();
    if (total < -kSpectralTolerance) {
        throw std::domain_error("negative norm deficit");
    }
    for (std::size_t k = 0; k < n; ++k) {
        double p = m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)).real();
        if (p < -kSpectralTolerance) {
            throw std::domain_error("negative diagonal entry in density matrix");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > kSpectralTolerance) {
        throw std::domain_error("outcome probabilities sum to " + format_double(total));
    }
    const double u = rng.uniform();
    double cum = 0.0;
    std::optional<std::size_t> last;
    for (std::size_t k = 0; k < n; ++k) {
        double p = std::max(m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)).real(), 0.0);
        if (p > 0.0) {
            last = k;
        }
        cum += p;
        if (u < cum) {
            return {false, k};
        }
    }
    if (rho.norm_deficit() > 0.0 || !last) {
        return {true, 0};
    }
    return {false, *last};
}

std::vector<double> ExperimentResult::frequencies() const {
    std::vector<double> out;
    out.reserve(counts.size());
    for (auto c : counts) {
        out.push_back(trials == 0 ? 0.0 : static_cast<double>(c) / static_cast<double>(trials));
    }
    return out;
}

std::uint64_t ExperimentResult::count(std::string_view outcome) const {
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
        if (outcomes[k] == outcome) {
            return counts[k];
        }
    }
    return 0;
}

std::vector<std::string> outcome_labels(const SceneDoc &scene) {
    Simulator sim(scene);
    std::vector<std::string> labels;
    for (const auto &mode : sim.basis()->modes()) {
        if (std::find(labels.begin(), labels.end(), mode.path) == labels.end()) {
            labels.push_back(mode.path);
        }
    }
    labels.emplace_back("loss");
    return labels;
}

ExperimentResult run_trials(const RunConfig &cfg, const SceneDoc &scene) {
    check_config(cfg);
    Simulator sim(scene);
    ExperimentResult result;
    result.policy = cfg.policy;
    result.seed = cfg.seed;
    result.trials = cfg.trials;
    result.phi = scene_phase(scene);
    result.outcomes = outcome_labels(scene);
    result.counts.assign(result.outcomes.size(), 0);
    const std::size_t loss = result.outcomes.size() - 1;

    const auto &basis = *sim.basis();
    std::vector<std::size_t> outcome_of(basis.size());
    for (std::size_t k = 0; k < basis.size(); ++k) {
        outcome_of[k] = static_cast<std::size_t>(
            std::distance(result.outcomes.begin(), std::find(result.outcomes.begin(), result.outcomes.end(), basis[k].path)));
    }

    for (std::uint64_t trial = 0; trial < cfg.trials; ++trial) {
        CounterRng rng(cfg.seed, trial);
        auto rho = sim.execute(cfg.policy);
        if (trial == 0) {
            check_state(rho);
        }
        auto o = sample_outcome(rho, rng);
        ++result.counts[o.loss ? loss : outcome_of[o.mode]];
    }
    result.analytic = analytic_outcomes(scene, cfg.policy, result.outcomes);
    return result;
}

ExperimentResult screen_histogram(const RunConfig &cfg, const SceneDoc &scene) {
    check_config(cfg);
    const auto *screen = scene.screen();
    if (screen == nullptr || !screen->screen) {
        throw ConfigError("scene has no screen");
    }
    auto params = *screen->screen;
    if (cfg.bins != 0) {
        params.bins = cfg.bins;
    }
    Simulator sim(scene);
    ScreenModel model(params);
    const auto bins = static_cast<std::size_t>(params.bins);

    ExperimentResult result;
    result.policy = cfg.policy;
    result.seed = cfg.seed;
    result.trials = cfg.trials;
    result.phi = scene_phase(scene);
    for (std::size_t b = 0; b < bins; ++b) {
        result.outcomes.push_back("bin" + std::to_string(b));
    }
    result.outcomes.emplace_back("loss");
    result.counts.assign(bins + 1, 0);

    // The final state is identical across trials in practice; the cumulative
    // table is rebuilt only when the slit-space state changes.
    std::optional<Eigen::Matrix2cd> cached_state;
    std::vector<double> cumulative;
    double on_screen = 0.0;
    for (std::uint64_t trial = 0; trial < cfg.trials; ++trial) {
        CounterRng rng(cfg.seed, trial);
        auto rho = sim.execute(cfg.policy);
        if (trial == 0) {
            check_state(rho);
        }
        Eigen::Matrix2cd slit = screen_state(rho, scene);
        if (!cached_state || *cached_state != slit) {
            auto masses = model.bin_masses(slit);
            cumulative.resize(bins);
            std::partial_sum(masses.begin(), masses.end(), cumulative.begin());
            if (!(cumulative.back() > 0.0)) {
                throw std::domain_error("screen receives no probability");
            }
            on_screen = std::clamp(slit.trace().real(), 0.0, 1.0);
            cached_state = slit;
        }
        if (rng.uniform() >= on_screen) {
            ++result.counts[bins];
            continue;
        }
        double u = rng.uniform() * cumulative.back();
        ++result.counts[sample_index(cumulative, u)];
    }

    auto analytic = model.bin_masses(ScreenModel::policy_state(cfg.policy));
    double total = std::accumulate(analytic.begin(), analytic.end(), 0.0);
    for (auto &a : analytic) {
        a /= total;
    }
    analytic.push_back(0.0);
    result.analytic = std::move(analytic);
    std::vector<double> histogram(result.counts.begin(), result.counts.end() - 1);
    result.visibility = visibility(histogram);
    return result;
}

std::uint64_t sweep_seed(std::uint64_t seed, std::size_t point) {
    return mix64(seed ^ mix64(static_cast<std::uint64_t>(point) + kGamma));
}

std::vector<double> phase_grid(std::size_t points) {
    std::vector<double> grid(points);
    for (std::size_t k = 0; k < points; ++k) {
        grid[k] = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(points);
    }
    return grid;
}

std::vector<ExperimentResult> run_sweep(const RunConfig &cfg, const SceneDoc &scene, unsigned threads) {
    check_config(cfg);
    if (cfg.sweep.empty()) {
        throw ConfigError("sweep grid is empty");
    }
    const std::size_t points = cfg.sweep.size();
    std::vector<ExperimentResult> results(points);
    auto work = [&](std::size_t k) {
        RunConfig point = cfg;
        point.seed = sweep_seed(cfg.seed, k);
        auto r = run_trials(point, with_phase(scene, cfg.sweep[k]));
        r.seed = cfg.seed;
        r.phi = cfg.sweep[k];
        results[k] = std::move(r);
    };
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, points));
    if (threads <= 1) {
        for (std::size_t k = 0; k < points; ++k) {
            work(k);
        }
        return results;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&]() {
            for (std::size_t k = next++; k < points; k = next++) {
                try {
                    work(k);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto &t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return results;
}

double sweep_visibility(const std::vector<ExperimentResult> &results, std::string_view outcome) {
    std::vector<double> counts;
    counts.reserve(results.size());
    for (const auto &r : results) {
        counts.push_back(static_cast<double>(r.count(outcome)));
    }
    return visibility(counts);
}

ChiSquare chi_square_test(const std::vector<std::uint64_t> &counts, const std::vector<double> &probabilities,
                          double min_expected) {
    if (counts.size() != probabilities.size() || counts.empty()) {
        throw ConfigError("chi-square test needs matching, non-empty counts and probabilities");
    }
    double n = 0.0;
    double mass = 0.0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        if (!(probabilities[k] >= 0.0)) {
            throw ConfigError("chi-square probabilities must be non-negative");
        }
        n += static_cast<double>(counts[k]);
        mass += probabilities[k];
    }
    if (!(mass > 0.0)) {
        throw ConfigError("chi-square probabilities sum to zero");
    }
    std::vector<std::pair<double, double>> groups;  // (observed, expected)
    double obs = 0.0;
    double exp = 0.0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        obs += static_cast<double>(counts[k]);
        exp += n * probabilities[k] / mass;
        if (exp >= min_expected) {
            groups.emplace_back(obs, exp);
            obs = 0.0;
            exp = 0.0;
        }
    }
    if (obs > 0.0 || exp > 0.0) {
        if (groups.empty()) {
            groups.emplace_back(obs, exp);
        } else {
            groups.back().first += obs;
            groups.back().second += exp;
        }
    }
    ChiSquare out;
    for (const auto &[o, e] : groups) {
        if (e > 0.0) {
            out.statistic += (o - e) * (o - e) / e;
        } else if (o > 0.0) {
            out.statistic = std::numeric_limits<double>::infinity();
        }
    }
    out.dof = groups.size() > 1 ? groups.size() - 1 : 0;
    if (out.dof == 0) {
        out.p_value = 1.0;
    } else if (std::isinf(out.statistic)) {
        out.p_value = 0.0;
    } else {
        out.p_value = boost::math::gamma_q(static_cast<double>(out.dof) / 2.0, out.statistic / 2.0);
    }
    return out;
}

}  // namespace topocollapse
