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

#include "topocollapse/optics.h"

#include <cmath>

#include "topocollapse/error.h"

namespace topocollapse {

std::string_view to_string(ComponentKind kind) {
    switch (kind) {
        case ComponentKind::BeamSplitter:
            return "beamsplitter";
        case ComponentKind::PhaseShifter:
            return "phaseshifter";
        case ComponentKind::Mirror:
            return "mirror";
        case ComponentKind::Polarizer:
            return "polarizer";
        case ComponentKind::PockelsCell:
            return "pockels";
        case ComponentKind::Shutter:
            return "shutter";
        case ComponentKind::Detector:
            return "detector";
        case ComponentKind::Screen:
            return "screen";
    }
    return "?";
}

std::optional<ComponentKind> parse_component_kind(std::string_view keyword) {
    for (auto kind : {ComponentKind::BeamSplitter, ComponentKind::PhaseShifter, ComponentKind::Mirror,
                      ComponentKind::Polarizer, ComponentKind::PockelsCell, ComponentKind::Shutter,
                      ComponentKind::Detector, ComponentKind::Screen}) {
        if (to_string(kind) == keyword) {
            return kind;
        }
    }
    return std::nullopt;
}

Unitary beam_splitter_unitary() {
    Eigen::MatrixXcd b(2, 2);
    b << M_SQRT1_2, -M_SQRT1_2, M_SQRT1_2, M_SQRT1_2;
    return Unitary({0, 1}, b);
}

Unitary phase_shifter_unitary(double phi) {
    Eigen::MatrixXcd p = Eigen::MatrixXcd::Identity(2, 2);
    p(0, 0) = std::polar(1.0, phi);
    return Unitary({0, 1}, p);
}

Unitary phase_shifter_unitary(const ModeBasis &basis, std::string_view path, double phi) {
    std::vector<std::size_t> support;
    for (std::size_t k = 0; k < basis.size(); ++k) {
        if (basis[k].path == path) {
            support.push_back(k);
        }
    }
    auto n = static_cast<Eigen::Index>(support.size());
    Eigen::MatrixXcd diag = Eigen::MatrixXcd::Identity(n, n) * std::polar(1.0, phi);
    return Unitary(std::move(support), diag);
}

Unitary pockels_apply(const ModeBasis &basis, std::string_view region, bool voltage_on) {
    if (!voltage_on) {
        return Unitary({}, Eigen::MatrixXcd(0, 0));
    }
    std::optional<std::size_t> h;
    std::optional<std::size_t> v;
    for (std::size_t k = 0; k < basis.size(); ++k) {
        if (basis[k].region != region) {
            continue;
        }
        if (basis[k].polarization == Polarization::H) {
            h = k;
        } else {
            v = k;
        }
    }
    if (!h || !v) {
        throw ConfigError("pockels cell needs both polarization modes in region " + std::string(region));
    }
    Eigen::MatrixXcd swap(2, 2);
    swap << 0.0, 1.0, 1.0, 0.0;
    return Unitary({*h, *v}, swap);
}

DensityMatrix polarizer_apply(DensityMatrix rho, Polarization axis, std::string_view region) {
    const auto &basis = *rho.basis();
    auto &m = rho.mutable_entries();
    double lost = 0.0;
    for (std::size_t k = 0; k < basis.size(); ++k) {
        if (basis[k].region != region || basis[k].polarization == axis) {
            continue;
        }
        auto i = static_cast<Eigen::Index>(k);
        lost += m(i, i).real();
        m.row(i).setZero();
        m.col(i).setZero();
    }
    rho.add_deficit(lost);
    return rho;
}

}  // namespace topocollapse
