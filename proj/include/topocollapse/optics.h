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

#ifndef TOPOCOLLAPSE_OPTICS_H
#define TOPOCOLLAPSE_OPTICS_H

#include <optional>
#include <string_view>

#include "topocollapse/qstate.h"

namespace topocollapse {

enum class ComponentKind { BeamSplitter, PhaseShifter, Mirror, Polarizer, PockelsCell, Shutter, Detector, Screen };

std::string_view to_string(ComponentKind kind);
std::optional<ComponentKind> parse_component_kind(std::string_view keyword);

/// 2x2 beam splitter over (x, y) port ordering: x -> (x+y)/sqrt2, y -> (-x+y)/sqrt2.
/// Support indices are {0, 1}.
Unitary beam_splitter_unitary();

/// diag(e^{i phi}, 1) over (x, y): the phase shifter sits on the x port.
Unitary phase_shifter_unitary(double phi);

/// Multiplies every mode carrying `path` by e^{i phi}; identity elsewhere.
Unitary phase_shifter_unitary(const ModeBasis &basis, std::string_view path, double phi);

/// Pockels cell acting on the modes of `region`. With voltage on, swaps
/// H <-> V; with voltage off, identity. Throws ConfigError if the region
/// lacks one of the two polarization modes while voltage is on.
Unitary pockels_apply(const ModeBasis &basis, std::string_view region, bool voltage_on);

/// Ideal polarizer on the modes of `region`: keeps the `axis` component and
/// moves the rest of the probability into the norm deficit.
DensityMatrix polarizer_apply(DensityMatrix rho, Polarization axis, std::string_view region);

}  // namespace topocollapse

#endif
