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

#ifndef TOPOCOLLAPSE_COLLAPSE_H
#define TOPOCOLLAPSE_COLLAPSE_H

#include <optional>
#include <string_view>
#include <vector>

#include "topocollapse/qstate.h"
#include "topocollapse/topology.h"

namespace topocollapse {

/// Which dynamics runs at topology-change events.
///   PoV1        - unitary evolution only; topology changes do nothing.
///   PoV2Strong  - dephase across strongly disconnected blocks.
///   PoV2Weak    - dephase across weakly disconnected blocks (finer).
enum class CollapsePolicy { PoV1, PoV2Strong, PoV2Weak };

inline constexpr CollapsePolicy kAllPolicies[] = {CollapsePolicy::PoV1, CollapsePolicy::PoV2Strong,
                                                  CollapsePolicy::PoV2Weak};

/// "pov1", "pov2-strong", "pov2-weak".
std::string_view to_string(CollapsePolicy policy);
std::optional<CollapsePolicy> parse_policy(std::string_view text);

/// Block label of every basis mode under `partition`. Throws ConfigError if a
/// mode's region is not covered.
std::vector<std::size_t> block_labels(const ModeBasis &basis, const Partition &partition);

/// sum_k P_k rho P_k with P_k projecting onto the modes labelled k.
DensityMatrix dephase_by_labels(DensityMatrix rho, const std::vector<std::size_t> &labels);

DensityMatrix block_dephase(DensityMatrix rho, const Partition &partition);

/// Collapse hook invoked whenever the apparatus topology changes.
/// `pol` selects the traversal polarization for the weak partition.
DensityMatrix on_topology_event(DensityMatrix rho, CollapsePolicy policy, const RegionGraph &graph, Polarization pol);

}  // namespace topocollapse

#endif
