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

// Bench description language (.scene files).
//
// One declaration per line, `keyword [name] key=value ...`, `#` starts a
// comment. Declarations may appear in any order. SI units throughout.
//
//   scene NAME
//   region NAME [path=P]                       static region (box, cavity)
//   fiber NAME path=P length=L                 propagation segment
//   source NAME region=R[,R..] pol=P[,P..] [amp=a,..] [phase=t,..] [time=T]
//   beamsplitter NAME in=Rx,Ry out=Rx,Ry
//   phaseshifter NAME between=R1:R2 phi=F
//   mirror NAME between=R1:R2
//   polarizer NAME between=R1:R2 axis=H|V
//   pockels NAME between=R1:R2 | region=R
//   shutter NAME between=R1:R2 response=T [state=open|closed]
//   detector NAME region=R
//   screen NAME inputs=R1,R2 separation=d distance=D wavelength=W sigma=S halfwidth=X bins=N
//   passage NAME between=R1:R2 [pass=open|closed|H|V]
//   close SHUTTER at=T
//   open SHUTTER at=T
//   voltage POCKELS on=T1 off=T2
//   constants [speed=C] [packet=T]
//   meta KEY value=TEXT

#ifndef TOPOCOLLAPSE_SCENE_H
#define TOPOCOLLAPSE_SCENE_H

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "topocollapse/optics.h"
#include "topocollapse/qstate.h"
#include "topocollapse/topology.h"

namespace topocollapse {

inline constexpr double kSpeedOfLight = 2.99792458e8;
inline constexpr double kDefaultPacketDuration = 1e-9;

struct RegionSpec {
    std::string id;
    std::string path;              // empty: the path label defaults to the id
    std::optional<double> length;  // set for fiber segments

    bool is_fiber() const {
        return length.has_value();
    }
    const std::string &path_label() const {
        return path.empty() ? id : path;
    }
    bool operator==(const RegionSpec &) const = default;
};

struct SourceTerm {
    std::string region;
    Polarization polarization = Polarization::V;
    double amplitude = 1.0;
    double phase = 0.0;

    bool operator==(const SourceTerm &) const = default;
};

struct SourceSpec {
    std::string id;
    std::vector<SourceTerm> terms;
    double time = 0.0;

    bool operator==(const SourceSpec &) const = default;
};

struct ScreenParams {
    double separation = 0.0;  // slit separation d
    double distance = 0.0;    // slit-to-screen distance D
    double wavelength = 0.0;
    double sigma = 0.0;       // envelope width
    double halfwidth = 0.0;   // screen window is [-halfwidth, halfwidth]
    int bins = 0;

    bool operator==(const ScreenParams &) const = default;
};

struct ComponentSpec {
    ComponentKind kind = ComponentKind::Mirror;
    std::string id;
    std::string location;              // region the component sits in
    std::vector<std::string> inputs;   // traversal input regions (port order)
    std::vector<std::string> outputs;  // traversal output regions (port order)
    double phase = 0.0;                                  // phase shifter
    Polarization axis = Polarization::V;                 // polarizer
    double response = 0.0;                               // shutter
    bool initially_closed = false;                       // shutter
    std::optional<ScreenParams> screen;                  // screen

    bool is_inline() const {
        return inputs.size() == 1 && outputs.size() == 1;
    }
    bool operator==(const ComponentSpec &) const = default;
};

struct PassageSpec {
    std::string id;
    std::string a;
    std::string b;
    PassCondition condition = PassCondition::open();

    bool operator==(const PassageSpec &) const = default;
};

struct ShutterTransition {
    std::string shutter;
    bool close = true;
    double time = 0.0;

    bool operator==(const ShutterTransition &) const = default;
};

struct PockelsWindow {
    std::string cell;
    double on = 0.0;
    double off = 0.0;

    bool operator==(const PockelsWindow &) const = default;
};

struct SceneDoc {
    std::string name = "unnamed";
    std::vector<RegionSpec> regions;
    std::optional<SourceSpec> source;
    std::vector<ComponentSpec> components;
    std::vector<PassageSpec> passages;
    std::vector<ShutterTransition> shutter_transitions;
    std::vector<PockelsWindow> pockels_windows;
    double propagation_speed = kSpeedOfLight;
    double packet_duration = kDefaultPacketDuration;
    std::map<std::string, std::string> metadata;

    const RegionSpec *find_region(std::string_view id) const;
    const ComponentSpec *find_component(std::string_view id) const;
    const ComponentSpec *screen() const;

    bool operator==(const SceneDoc &) const = default;
};

struct ParseDiagnostic {
    std::size_t line = 0;
    std::size_t column = 0;
    std::string message;
};

std::string to_string(const ParseDiagnostic &d);

class SceneParseError : public std::runtime_error {
   public:
    explicit SceneParseError(std::vector<ParseDiagnostic> diagnostics);
    const std::vector<ParseDiagnostic> &diagnostics() const {
        return diagnostics_;
    }

   private:
    std::vector<ParseDiagnostic> diagnostics_;
};

struct ParsedScene {
    SceneDoc doc;
    std::map<std::string, std::size_t> line_of;  // declared identifier -> line
    std::vector<std::string> lines;              // source text, for error echoes
};

/// Throws SceneParseError carrying every diagnostic found.
SceneDoc parse_scene(std::string_view text);
ParsedScene parse_scene_annotated(std::string_view text);

/// Canonical text: scene, regions, source, components, passages,
/// schedules, constants, metadata.
std::string serialize_scene(const SceneDoc &doc);

enum class Severity { Error, Warning };

struct SceneIssue {
    Severity severity = Severity::Error;
    std::string subject;  // offending identifier, may be empty
    std::string message;
};

struct SceneReport {
    std::vector<SceneIssue> issues;

    bool has_errors() const;
    std::size_t error_count() const;
    std::size_t warning_count() const;
};

SceneReport validate_scene(const SceneDoc &doc);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

}  // namespace topocollapse

#endif
