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


#include "topocollapse/collapse.h"

#include <gtest/gtest.h>

#include <random>

#include "test_support.h"
#include "topocollapse/error.h"

namespace topocollapse {
namespace {

using testing::grid_basis;
using testing::random_density;

// Sum of P_k rho P_k with explicit projectors.
Eigen::MatrixXcd projector_sum(const Eigen::MatrixXcd &rho, const std::vector<std::size_t> &labels) {
    std::size_t blocks = *std::max_element(labels.begin(), labels.end()) + 1;
    const auto n = rho.rows();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
    for (std::size_t k = 0; k < blocks; ++k) {
        Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (labels[static_cast<std::size_t>(i)] == k) {
                p(i, i) = 1.0;
            }
        }
        out += p * rho * p;
    }
    return out;
}

TEST(collapse, dephasing_equals_projector_sum) {
    std::mt19937_64 rng(21);
    auto basis = grid_basis(3);
    for (int trial = 0; trial < 200; ++trial) {
        auto rho = random_density(rng, basis, 1 + trial % 6);
        std::vector<std::size_t> labels(6);
        for (auto &l : labels) {
            l = rng() % 3;
        }
        auto out = dephase_by_labels(rho, labels);
        EXPECT_LT((out.entries() - projector_sum(rho.entries(), labels)).cwiseAbs().maxCoeff(), 1e-15);
    }
}

TEST(collapse, block_dephase_uses_region_blocks) {
    std::mt19937_64 rng(22);
    auto basis = grid_basis(3);
    auto rho = random_density(rng, basis, 6);
    auto out = block_dephase(rho, {{"r0", "r2"}, {"r1"}});
    // Modes 0,1 (r0) and 4,5 (r2) share a block; 2,3 (r1) is separate.
    EXPECT_EQ(out.entries()(0, 4), rho.entries()(0, 4));
    EXPECT_EQ(out.entries()(1, 0), rho.entries()(1, 0));
    EXPECT_EQ(out.entries()(0, 2), Complex(0.0));
    EXPECT_EQ(out.entries()(5, 3), Complex(0.0));
    EXPECT_EQ(out.entries()(2, 3), rho.entries()(2, 3));
}

TEST(collapse, two_box_superposition_collapses_to_weights) {
    auto basis = make_basis({{"box1", "psi1", Polarization::V}, {"box2", "psi2", Polarization::V}});
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXcd amps(2);
        amps << testing::random_complex(rng), testing::random_complex(rng);
        amps.normalize();
        auto rho = to_density(PureState(basis, amps));
        RegionGraph closed({"box1", "box2"}, {{"box1", "box2", PassCondition::closed()}});
        auto out = on_topology_event(rho, CollapsePolicy::PoV2Strong, closed, Polarization::V);
        EXPECT_EQ(out.entries()(0, 1), Complex(0.0));
        EXPECT_EQ(out.entries()(0, 0), rho.entries()(0, 0));
        EXPECT_EQ(out.entries()(1, 1), rho.entries()(1, 1));
        EXPECT_EQ(on_topology_event(rho, CollapsePolicy::PoV1, closed, Polarization::V).entries(), rho.entries());
    }
}

TEST(collapse, policies_differ_only_on_weak_partitions) {
    std::mt19937_64 rng(24);
    auto basis = make_basis({{"c1", "c1", Polarization::H},
                             {"c1", "c1", Polarization::V},
                             {"gap", "gap", Polarization::H},
                             {"gap", "gap", Polarization::V},
                             {"c2", "c2", Polarization::H},
                             {"c2", "c2", Polarization::V}});
    RegionGraph g({"c1", "gap", "c2"},
                  {{"c1", "gap", PassCondition::polarized_only(Polarization::V)},
                   {"gap", "c2", PassCondition::polarized_only(Polarization::H)}});
    auto rho = random_density(rng, basis, 6);
    auto strong = on_topology_event(rho, CollapsePolicy::PoV2Strong, g, Polarization::V);
    auto weak = on_topology_event(rho, CollapsePolicy::PoV2Weak, g, Polarization::V);
    EXPECT_EQ(strong.entries(), rho.entries());
    EXPECT_EQ(weak.entries()(1, 5), Complex(0.0));
    EXPECT_EQ(weak.entries()(1, 3), rho.entries()(1, 3));
}

TEST(collapse, labels_must_cover_basis) {
    auto basis = grid_basis(2);
    EXPECT_THROW(block_labels(*basis, {{"r0"}}), ConfigError);
    DensityMatrix rho(basis, Eigen::MatrixXcd::Identity(4, 4) / 4.0);
    EXPECT_THROW(dephase_by_labels(rho, {0, 1}), ConfigError);
}

TEST(collapse, policy_names) {
    for (auto p : kAllPolicies) {
        EXPECT_EQ(parse_policy(to_string(p)), p);
    }
    EXPECT_EQ(to_string(CollapsePolicy::PoV2Strong), "pov2-strong");
    EXPECT_FALSE(parse_policy("pov3").has_value());
}

}  // namespace
}  // namespace topocollapse
