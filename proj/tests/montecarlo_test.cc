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

#include <gtest/gtest.h>

#include <numeric>
#include <random>
#include <set>

#include "test_support.h"
#include "topocollapse/error.h"
#include "topocollapse/experiments.h"
#include "topocollapse/timeline.h"

namespace topocollapse {
namespace {

SceneDoc fig4_at(double phi) {
    PresetParams p;
    p.phi = phi;
    return preset(PresetKind::Fig4, p);
}

TEST(montecarlo, counter_rng_is_a_pure_function_of_position) {
    CounterRng a(5, 9);
    CounterRng b(5, 9);
    std::vector<std::uint64_t> first;
    for (int k = 0; k < 100; ++k) {
        first.push_back(a.next());
        EXPECT_EQ(first.back(), b.next());
    }
    EXPECT_EQ(a.counter(), 100u);
    CounterRng other_stream(5, 10);
    CounterRng other_seed(6, 9);
    int same = 0;
    for (int k = 0; k < 100; ++k) {
        same += other_stream.next() == first[k];
        same += other_seed.next() == first[k];
    }
    EXPECT_EQ(same, 0);
}

TEST(montecarlo, uniform_draws_are_unit_interval_and_balanced) {
    CounterRng rng(1, 0);
    double sum = 0.0;
    double sum_sq = 0.0;
    const int n = 200000;
    std::vector<int> deciles(10, 0);
    for (int k = 0; k < n; ++k) {
        double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
        sum_sq += u * u;
        ++deciles[static_cast<std::size_t>(u * 10.0)];
    }
    EXPECT_NEAR(sum / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
    EXPECT_NEAR(sum_sq / n, 1.0 / 3.0, 0.005);
    std::vector<std::uint64_t> counts(deciles.begin(), deciles.end());
    EXPECT_GT(chi_square_test(counts, std::vector<double>(10, 0.1)).p_value, 1e-4);
}

TEST(montecarlo, mix64_has_no_collisions_on_small_inputs) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t k = 0; k < 10000; ++k) {
        seen.insert(mix64(k));
    }
    EXPECT_EQ(seen.size(), 10000u);
}

TEST(montecarlo, sampling_respects_certain_outcomes) {
    auto basis = testing::grid_basis(1);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
    m(1, 1) = 1.0;
    DensityMatrix sure(basis, m);
    DensityMatrix lost(basis, Eigen::MatrixXcd::Zero(2, 2), 1.0);
    CounterRng rng(3, 0);
    for (int k = 0; k < 1000; ++k) {
        EXPECT_EQ(sample_outcome(sure, rng), (SampledOutcome{false, 1}));
        EXPECT_TRUE(sample_outcome(lost, rng).loss);
    }
}

TEST(montecarlo, sampling_rejects_non_distributions) {
    auto basis = testing::grid_basis(1);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
    m(0, 0) = 0.7;
    CounterRng rng(3, 0);
    EXPECT_THROW(sample_outcome(DensityMatrix(basis, m), rng), std::domain_error);
    m(0, 0) = 1.2;
    m(1, 1) = -0.2;
    EXPECT_THROW(sample_outcome(DensityMatrix(basis, m), rng), std::domain_error);
}

TEST(montecarlo, sampling_frequencies_follow_the_diagonal) {
    std::mt19937_64 gen(71);
    auto basis = testing::grid_basis(2);
    auto rho = testing::random_density(gen, basis, 2, 0.2);
    CounterRng rng(71, 0);
    const int n = 100000;
    std::vector<std::uint64_t> counts(5, 0);
    for (int k = 0; k < n; ++k) {
        auto s = sample_outcome(rho, rng);
        ++counts[s.loss ? 4 : s.mode];
    }
    std::vector<double> p;
    for (int k = 0; k < 4; ++k) {
        p.push_back(rho.entries()(k, k).real());
    }
    p.push_back(rho.norm_deficit());
    EXPECT_GT(chi_square_test(counts, p).p_value, 1e-4);
}

TEST(montecarlo, discriminating_point_counts) {
    RunConfig cfg;
    cfg.trials = 10000;
    cfg.seed = 7;
    auto coherent = run_trials(cfg, fig4_at(0.0));
    EXPECT_EQ(coherent.count("x"), 0u);
    EXPECT_EQ(coherent.count("y"), 10000u);
    EXPECT_EQ(coherent.count("loss"), 0u);
    cfg.policy = CollapsePolicy::PoV2Strong;
    auto collapsed = run_trials(cfg, fig4_at(0.0));
    double fx = static_cast<double>(collapsed.count("x")) / 10000.0;
    EXPECT_GE(fx, 0.48);
    EXPECT_LE(fx, 0.52);
    EXPECT_EQ(collapsed.outcomes, (std::vector<std::string>{"x", "y", "loss"}));
    EXPECT_EQ(collapsed.analytic, (std::vector<double>{0.5, 0.5, 0.0}));
}

TEST(montecarlo, runs_are_deterministic_and_conserve_counts) {
    RunConfig cfg;
    cfg.trials = 5000;
    cfg.seed = 99;
    for (auto policy : kAllPolicies) {
        cfg.policy = policy;
        auto doc = fig4_at(1.1);
        auto a = run_trials(cfg, doc);
        auto b = run_trials(cfg, doc);
        EXPECT_EQ(a.counts, b.counts);
        std::uint64_t total = 0;
        for (auto c : a.counts) {
            total += c;
        }
        EXPECT_EQ(total, cfg.trials);
        auto f = a.frequencies();
        EXPECT_NEAR(std::accumulate(f.begin(), f.end(), 0.0), 1.0, 1e-12);
    }
}

TEST(montecarlo, frequencies_converge_within_four_sigma) {
    const std::uint64_t n = 10000;
    for (auto policy : {CollapsePolicy::PoV1, CollapsePolicy::PoV2Strong}) {
        auto doc = fig4_at(M_PI / 3.0);
        int inside = 0;
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            RunConfig cfg;
            cfg.trials = n;
            cfg.seed = seed;
            cfg.policy = policy;
            auto r = run_trials(cfg, doc);
            bool ok = true;
            for (std::size_t k = 0; k < r.outcomes.size(); ++k) {
                double p = r.analytic[k];
                double f = static_cast<double>(r.counts[k]) / static_cast<double>(n);
                ok = ok && std::abs(f - p) <= 4.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
            }
            inside += ok;
        }
        EXPECT_GE(inside, 99) << to_string(policy);
    }
}

TEST(montecarlo, trial_streams_are_independent_of_run_length) {
    RunConfig cfg;
    cfg.trials = 1;
    cfg.seed = 1234;
    cfg.policy = CollapsePolicy::PoV2Strong;
    auto doc = fig4_at(0.0);
    // Trial 0 of a long run reproduces a one-trial run.
    auto single = run_trials(cfg, doc);
    CounterRng rng(cfg.seed, 0);
    Simulator sim(doc);
    auto s = sample_outcome(sim.execute(cfg.policy), rng);
    EXPECT_EQ(single.counts[s.loss ? 2 : ((*sim.basis())[s.mode].path == "x" ? 0 : 1)], 1u);
}

TEST(montecarlo, parallel_sweep_equals_sequential) {
    RunConfig cfg;
    cfg.trials = 2000;
    cfg.seed = 17;
    cfg.policy = CollapsePolicy::PoV1;
    cfg.sweep = phase_grid(16);
    auto doc = preset(PresetKind::Fig4);
    auto serial = run_sweep(cfg, doc, 1);
    auto parallel = run_sweep(cfg, doc, 4);
    ASSERT_EQ(serial.size(), 16u);
    for (std::size_t k = 0; k < serial.size(); ++k) {
        EXPECT_EQ(serial[k].counts, parallel[k].counts);
        EXPECT_EQ(serial[k].phi, parallel[k].phi);
        EXPECT_EQ(serial[k].seed, 17u);
        // Each point matches a direct run with its derived seed.
        RunConfig one = cfg;
        one.seed = sweep_seed(cfg.seed, k);
        EXPECT_EQ(run_trials(one, with_phase(doc, cfg.sweep[k])).counts, serial[k].counts);
    }
}

TEST(montecarlo, phase_grid_is_uniform) {
    auto g = phase_grid(4);
    ASSERT_EQ(g.size(), 4u);
    EXPECT_EQ(g[0], 0.0);
    EXPECT_DOUBLE_EQ(g[1], M_PI / 2.0);
    EXPECT_DOUBLE_EQ(g[3], 1.5 * M_PI);
}

TEST(montecarlo, sweep_visibility_separates_policies) {
    RunConfig cfg;
    cfg.trials = 20000;
    cfg.seed = 3;
    cfg.sweep = phase_grid(16);
    auto doc = preset(PresetKind::Fig4);
    EXPECT_GE(sweep_visibility(run_sweep(cfg, doc), "x"), 0.99);
    cfg.policy = CollapsePolicy::PoV2Strong;
    EXPECT_LE(sweep_visibility(run_sweep(cfg, doc), "x"), 0.05);
}

TEST(montecarlo, chi_square_matches_hand_computation) {
    auto r = chi_square_test({30, 70}, {0.25, 0.75});
    // (30-25)^2/25 + (70-75)^2/75
    EXPECT_NEAR(r.statistic, 1.0 + 25.0 / 75.0, 1e-12);
    EXPECT_EQ(r.dof, 1u);
    // Upper tail of chi-square(1) at 1.3333: erfc(sqrt(x/2)).
    EXPECT_NEAR(r.p_value, std::erfc(std::sqrt(r.statistic / 2.0)), 1e-12);
    EXPECT_NEAR(chi_square_test({50, 50}, {0.5, 0.5}).p_value, 1.0, 1e-12);
}

TEST(montecarlo, chi_square_pools_sparse_cells) {
    // Expectations 1, 1, 48, 50: the first three pool into one cell.
    auto r = chi_square_test({2, 0, 48, 50}, {0.01, 0.01, 0.48, 0.5});
    EXPECT_EQ(r.dof, 1u);
    EXPECT_NEAR(r.statistic, 0.0, 1e-12);
    EXPECT_THROW(chi_square_test({1, 2}, {0.5}), ConfigError);
    EXPECT_THROW(chi_square_test({1, 2}, {0.0, 0.0}), ConfigError);
}

TEST(montecarlo, screen_histograms_match_their_patterns) {
    RunConfig cfg;
    cfg.trials = 100000;
    cfg.seed = 7;
    auto doc = preset(PresetKind::Fig3);
    auto coherent = screen_histogram(cfg, doc);
    cfg.policy = CollapsePolicy::PoV2Strong;
    auto collapsed = screen_histogram(cfg, doc);
    ASSERT_EQ(coherent.outcomes.size(), 65u);
    EXPECT_EQ(coherent.outcomes.front(), "bin0");
    EXPECT_EQ(coherent.count("loss"), 0u);
    for (const auto *r : {&coherent, &collapsed}) {
        std::vector<std::uint64_t> counts(r->counts.begin(), r->counts.end() - 1);
        std::vector<double> p(r->analytic.begin(), r->analytic.end() - 1);
        EXPECT_GT(chi_square_test(counts, p).p_value, 0.001) << to_string(r->policy);
    }
    EXPECT_GT(coherent.visibility, 0.9);
    EXPECT_LT(collapsed.visibility, 0.1);
}

TEST(montecarlo, coherent_screen_peaks_at_the_center) {
    auto doc = preset(PresetKind::Fig3);
    const auto &params = *doc.screen()->screen;
    ScreenModel model(params);
    auto masses = model.bin_masses(ScreenModel::policy_state(CollapsePolicy::PoV1));
    auto peak = std::max_element(masses.begin(), masses.end()) - masses.begin();
    EXPECT_TRUE(peak == 31 || peak == 32);
    EXPECT_NEAR(masses[31], masses[32], 1e-15);
    RunConfig cfg;
    cfg.trials = 100000;
    cfg.seed = 7;
    auto r = screen_histogram(cfg, doc);
    auto sampled = std::max_element(r.counts.begin(), r.counts.end() - 1) - r.counts.begin();
    EXPECT_TRUE(sampled == 31 || sampled == 32) << sampled;
}

TEST(montecarlo, screen_histogram_needs_a_screen) {
    RunConfig cfg;
    EXPECT_THROW(screen_histogram(cfg, preset(PresetKind::Fig4)), ConfigError);
}

TEST(montecarlo, screen_bins_follow_the_config) {
    RunConfig cfg;
    cfg.trials = 1000;
    cfg.bins = 16;
    auto r = screen_histogram(cfg, preset(PresetKind::Fig3));
    EXPECT_EQ(r.outcomes.size(), 17u);
}

}  // namespace
}  // namespace topocollapse
