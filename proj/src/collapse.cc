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

#include <map>

#include "topocollapse/error.h"

namespace topocollapse {

std::string_view to_string(CollapsePolicy policy) {
    switch (policy) {
        case CollapsePolicy::PoV1:
            return "pov1";
        case CollapsePolicy::PoV2Strong:
            return "pov2-strong";
        case CollapsePolicy::PoV2Weak:
            return "pov2-weak";
    }
    return "?";
}

std::optional<CollapsePolicy> parse_policy(std::string_view text) {
    for (auto p : kAllPolicies) {
        if (to_string(p) == text) {
            return p;
        }
    }
    return std::nullopt;
}

std::vector<std::size_t> block_labels(const ModeBasis &basis, const Partition &partition) {
    std::map<std::string_view, std::size_t> block_of;
    for (std::size_t k = 0; k < partition.size(); ++k) {
        for (const auto &region : partition[k]) {
            block_of.emplace(region, k);
        }
    }
    std::vector<std::size_t> labels(basis.size());
    for (std::size_t m = 0; m < basis.size(); ++m) {
        auto it = block_of.find(basis[m].region);
        if (it == block_of.end()) {
            throw ConfigError("mode " + to_string(basis[m]) + " lies outside the partition");
        }
        labels[m] = it->second;
    }
    return labels;
}

DensityMatrix dephase_by_labels(DensityMatrix rho, const std::vector<std::size_t> &labels) {
    if (labels.size() != rho.dimension()) {
        throw ConfigError("block labels do not match the density matrix dimension");
    }
    auto &m = rho.mutable_entries();
    const auto n = static_cast<Eigen::Index>(labels.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (labels[static_cast<std::size_t>(i)] != labels[static_cast<std::size_t>(j)]) {
                m(i, j) = 0.0;
            }
        }
    }
    return rho;
}

DensityMatrix block_dephase(DensityMatrix rho, const Partition &partition) {
    auto labels = block_labels(*rho.basis(), partition);
    return dephase_by_labels(std::move(rho), labels);
}

DensityMatrix on_topology_event(DensityMatrix rho, CollapsePolicy policy, const RegionGraph &graph, Polarization pol) {
    switch (policy) {
        case CollapsePolicy::PoV1:
            return rho;
        case CollapsePolicy::PoV2Strong:
            return block_dephase(std::move(rho), strong_partition(graph));
        case CollapsePolicy::PoV2Weak:
            return block_dephase(std::move(rho), weak_partition(graph, pol));
    }
    return rho;
}

}  // namespace topocollapse
