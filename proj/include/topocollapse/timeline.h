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

#ifndef TOPOCOLLAPSE_TIMELINE_H
#define TOPOCOLLAPSE_TIMELINE_H

#include <array>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "topocollapse/collapse.h"
#include "topocollapse/scene.h"

namespace topocollapse {

enum class EventKind { ShutterClose, ShutterOpen, VoltageOn, VoltageOff, Emit, Traverse, Detect };

std::string_view to_string(EventKind kind);

struct Event {
    double time = 0.0;
    EventKind kind = EventKind::Emit;
    std::string subject;  // component id; source id for Emit
    double lead = 0.0;    // packet window, Traverse and Detect only
    double trail = 0.0;
};

/// Strict weak order: time, then kind, then subject.
bool event_before(const Event &a, const Event &b);

struct Transit {
    double enter = 0.0;
    std::optional<double> exit;  // unset for static regions
};

struct ShutterInfo {
    double response = 0.0;
    bool initially_closed = false;
};

struct Timeline {
    std::vector<Event> events;
    double propagation_speed = kSpeedOfLight;
    double packet_duration = kDefaultPacketDuration;
    std::map<std::string, Transit> transits;     // per reached region
    std::map<std::string, ShutterInfo> shutters;
};

/// Throws ConfigError on non-positive lengths, cyclic geometry, or beam
/// splitter inputs that do not arrive together.
Timeline schedule(const SceneDoc &scene);

enum class ViolationKind { Contact, Ordering, Pockels };

std::string_view to_string(ViolationKind kind);

struct TimingViolation {
    ViolationKind kind = ViolationKind::Contact;
    std::string component;
    double time = 0.0;
    std::string detail;
};

std::vector<TimingViolation> validate_timing(const Timeline &tl);

class TimingError : public std::runtime_error {
   public:
    explicit TimingError(std::vector<TimingViolation> violations);
    const std::vector<TimingViolation> &violations() const {
        return violations_;
    }

   private:
    std::vector<TimingViolation> violations_;
};

/// Shortest inter-shutter path for a contact-free close/open cycle.
double min_separation(double response_time, double speed);

struct GraphSnapshot {
    double time = 0.0;
    RegionGraph graph;
};

struct RunRecord {
    DensityMatrix state;
    std::vector<GraphSnapshot> history;  // initial graph, then one per topology change
};

/// Scene compiled once for repeated execution. Immutable after construction,
/// so one instance may be shared between threads.
class Simulator {
   public:
    /// Throws ConfigError for bad geometry and TimingError for timing violations.
    explicit Simulator(const SceneDoc &scene);

    const Timeline &timeline() const {
        return timeline_;
    }
    const BasisPtr &basis() const {
        return basis_;
    }
    const DensityMatrix &initial_state() const {
        return initial_;
    }

    /// Final pre-detection state.
    DensityMatrix execute(CollapsePolicy policy) const;
    RunRecord run(CollapsePolicy policy) const;

    /// Topology with shutter states as of time t (transitions at t included).
    RegionGraph graph_at(double t) const;

   private:
    struct Step {
        enum class Op { Apply, Polarize, Collapse, PockelsCollapse };
        Op op = Op::Apply;
        std::size_t unitary = 0;
        std::vector<std::size_t> zeroed;                   // Polarize
        std::array<std::array<std::size_t, 2>, 3> labels{};  // [policy][pol] into label_sets_
        std::array<std::vector<std::size_t>, 2> watched;  // PockelsCollapse: out modes per pol
        Polarization pol = Polarization::V;
        double time = 0.0;
        std::string subject;
    };

    RegionGraph graph_with(const std::map<std::string, bool> &closed) const;
    std::size_t intern_labels(std::vector<std::size_t> labels);
    DensityMatrix step(DensityMatrix rho, const Step &s, CollapsePolicy policy) const;

    SceneDoc scene_;
    Timeline timeline_;
    BasisPtr basis_;
    DensityMatrix initial_;
    std::vector<Unitary> unitaries_;
    std::vector<std::vector<std::size_t>> label_sets_;
    std::vector<Step> program_;
};

RunRecord run(const SceneDoc &scene, CollapsePolicy policy);

}  // namespace topocollapse

#endif
