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

#include "topocollapse/topology.h"

#include <algorithm>
#include <array>
#include <functional>
#include <numeric>
#include <queue>

#include "topocollapse/error.h"

namespace topocollapse {

namespace {

class DisjointSets {
   public:
    explicit DisjointSets(std::size_t n) : parent_(n) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) {
            parent_[std::max(a, b)] = std::min(a, b);
        }
    }

   private:
    std::vector<std::size_t> parent_;
};

Partition components(const RegionGraph &graph, const std::function<bool(const PassCondition &)> &usable) {
    const auto &regions = graph.regions();
    DisjointSets sets(regions.size());
    for (const auto &p : graph.passages()) {
        if (usable(p.condition)) {
            sets.unite(graph.index_of(p.a), graph.index_of(p.b));
        }
    }
    std::map<std::size_t, std::vector<std::string>> grouped;
    for (std::size_t k = 0; k < regions.size(); ++k) {
        grouped[sets.find(k)].push_back(regions[k]);
    }
    Partition out;
    out.reserve(grouped.size());
    for (auto &[root, members] : grouped) {
        std::sort(members.begin(), members.end());
        out.push_back(std::move(members));
    }
    std::sort(out.begin(), out.end(), [](const auto &x, const auto &y) { return x.front() < y.front(); });
    return out;
}

bool same_block(const Partition &partition, std::string_view a, std::string_view b) {
    for (const auto &block : partition) {
        bool has_a = std::binary_search(block.begin(), block.end(), a, std::less<>());
        bool has_b = std::binary_search(block.begin(), block.end(), b, std::less<>());
        if (has_a || has_b) {
            return has_a && has_b;
        }
    }
    return false;
}

}  // namespace

std::string to_string(const PassCondition &c) {
    switch (c.kind) {
        case PassCondition::Kind::Open:
            return "open";
        case PassCondition::Kind::Closed:
            return "closed";
        case PassCondition::Kind::PolarizedOnly:
            return std::string(to_string(c.axis));
    }
    return "?";
}

RegionGraph::RegionGraph(std::vector<std::string> regions, std::vector<Passage> passages, std::set<std::string> rotators)
    : regions_(std::move(regions)), passages_(std::move(passages)), rotators_(std::move(rotators)) {
    for (std::size_t k = 0; k < regions_.size(); ++k) {
        if (!index_.emplace(regions_[k], k).second) {
            throw ConfigError("duplicate region in graph: " + regions_[k]);
        }
    }
    for (const auto &p : passages_) {
        if (!contains(p.a) || !contains(p.b)) {
            throw ConfigError("passage references unknown region: " + p.a + " - " + p.b);
        }
    }
    for (const auto &r : rotators_) {
        if (!contains(r)) {
            throw ConfigError("rotator in unknown region: " + r);
        }
    }
}

bool RegionGraph::contains(std::string_view region) const {
    return index_.find(region) != index_.end();
}

std::size_t RegionGraph::index_of(std::string_view region) const {
    auto it = index_.find(region);
    if (it == index_.end()) {
        throw ConfigError("unknown region: " + std::string(region));
    }
    return it->second;
}

std::string_view to_string(ConnectivityClass c) {
    switch (c) {
        case ConnectivityClass::Connected:
            return "connected";
        case ConnectivityClass::WeaklyDisconnected:
            return "weakly-disconnected";
        case ConnectivityClass::StronglyDisconnected:
            return "strongly-disconnected";
    }
    return "?";
}

Partition strong_partition(const RegionGraph &graph) {
    return components(graph, [](const PassCondition &c) { return c.traversable_with_flips(); });
}

Partition weak_partition(const RegionGraph &graph, Polarization pol) {
    return components(graph, [pol](const PassCondition &c) { return c.traversable(pol); });
}

ConnectivityClass classify(const RegionGraph &graph, std::string_view a, std::string_view b, Polarization pol) {
    graph.index_of(a);
    graph.index_of(b);
    if (same_block(weak_partition(graph, pol), a, b)) {
        return ConnectivityClass::Connected;
    }
    if (same_block(strong_partition(graph), a, b)) {
        return ConnectivityClass::WeaklyDisconnected;
    }
    return ConnectivityClass::StronglyDisconnected;
}

bool reachable_with_rotators(const RegionGraph &graph, std::string_view a, std::string_view b, Polarization pol) {
    const auto n = graph.regions().size();
    const auto start = graph.index_of(a);
    const auto goal = graph.index_of(b);
    std::vector<std::vector<std::size_t>> adjacency(n);
    for (std::size_t e = 0; e < graph.passages().size(); ++e) {
        const auto &p = graph.passages()[e];
        adjacency[graph.index_of(p.a)].push_back(e);
        adjacency[graph.index_of(p.b)].push_back(e);
    }
    // State = (region, polarization).
    std::vector<std::array<bool, 2>> seen(n, {false, false});
    std::queue<std::pair<std::size_t, Polarization>> frontier;
    auto visit = [&](std::size_t r, Polarization p) {
        auto &slot = seen[r][static_cast<std::size_t>(p)];
        if (!slot) {
            slot = true;
            frontier.emplace(r, p);
        }
    };
    visit(start, pol);
    while (!frontier.empty()) {
        auto [r, p] = frontier.front();
        frontier.pop();
        if (r == goal) {
            return true;
        }
        if (graph.rotators().count(graph.regions()[r]) != 0) {
            visit(r, flipped(p));
        }
        for (auto e : adjacency[r]) {
            const auto &passage = graph.passages()[e];
            if (!passage.condition.traversable(p)) {
                continue;
            }
            auto ia = graph.index_of(passage.a);
            visit(ia == r ? graph.index_of(passage.b) : ia, p);
        }
    }
    return false;
}

}  // namespace topocollapse
