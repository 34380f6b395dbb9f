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

#ifndef TOPOCOLLAPSE_TOPOLOGY_H
#define TOPOCOLLAPSE_TOPOLOGY_H

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "topocollapse/qstate.h"

namespace topocollapse {

/// What may cross a passage between two regions.
struct PassCondition {
    enum class Kind { Open, PolarizedOnly, Closed };

    Kind kind = Kind::Open;
    Polarization axis = Polarization::V;  // meaningful for PolarizedOnly only

    static PassCondition open() {
        return {Kind::Open, Polarization::V};
    }
    static PassCondition polarized_only(Polarization axis) {
        return {Kind::PolarizedOnly, axis};
    }
    static PassCondition closed() {
        return {Kind::Closed, Polarization::V};
    }

    bool traversable(Polarization p) const {
        return kind == Kind::Open || (kind == Kind::PolarizedOnly && axis == p);
    }
    bool traversable_with_flips() const {
        return kind != Kind::Closed;
    }

    bool operator==(const PassCondition &other) const {
        return kind == other.kind && (kind != Kind::PolarizedOnly || axis == other.axis);
    }
};

std::string to_string(const PassCondition &c);

struct Passage {
    std::string a;
    std::string b;
    PassCondition condition;
};

/// Undirected snapshot of the apparatus topology at one instant.
class RegionGraph {
   public:
    RegionGraph() = default;
    RegionGraph(std::vector<std::string> regions, std::vector<Passage> passages, std::set<std::string> rotators = {});

    const std::vector<std::string> &regions() const {
        return regions_;
    }
    const std::vector<Passage> &passages() const {
        return passages_;
    }
    const std::set<std::string> &rotators() const {
        return rotators_;
    }

    bool contains(std::string_view region) const;
    /// Throws ConfigError for an unknown region.
    std::size_t index_of(std::string_view region) const;

   private:
    std::vector<std::string> regions_;
    std::vector<Passage> passages_;
    std::set<std::string> rotators_;
    std::map<std::string, std::size_t, std::less<>> index_;
};

/// Ordered by severity: Connected < WeaklyDisconnected < StronglyDisconnected.
enum class ConnectivityClass { Connected = 0, WeaklyDisconnected = 1, StronglyDisconnected = 2 };

std::string_view to_string(ConnectivityClass c);

/// Blocks of region identifiers. Members are sorted; blocks are sorted by
/// their smallest member.
using Partition = std::vector<std::vector<std::string>>;

ConnectivityClass classify(const RegionGraph &graph, std::string_view a, std::string_view b, Polarization pol);

/// Components once Closed passages are removed (polarization ignored).
Partition strong_partition(const RegionGraph &graph);

/// Components under traversal with a fixed polarization and no rotation.
Partition weak_partition(const RegionGraph &graph, Polarization pol);

/// True when a photon leaving `a` with polarization `pol` can reach `b` if it
/// may only change polarization inside the graph's rotator regions.
bool reachable_with_rotators(const RegionGraph &graph, std::string_view a, std::string_view b, Polarization pol);

}  // namespace topocollapse

#endif
