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

#include <array>
#include <charconv>
#include <sstream>

#include "topocollapse/scene.h"

namespace topocollapse {

namespace {

template <typename T, typename F>
std::string join(const std::vector<T> &items, char sep, F &&format) {
    std::string out;
    for (std::size_t k = 0; k < items.size(); ++k) {
        if (k != 0) {
            out += sep;
        }
        out += format(items[k]);
    }
    return out;
}

}  // namespace

std::string format_double(double value) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc()) {
        return "nan";
    }
    return std::string(buf.data(), ptr);
}

const RegionSpec *SceneDoc::find_region(std::string_view id) const {
    for (const auto &r : regions) {
        if (r.id == id) {
            return &r;
        }
    }
    return nullptr;
}

const ComponentSpec *SceneDoc::find_component(std::string_view id) const {
    for (const auto &c : components) {
        if (c.id == id) {
            return &c;
        }
    }
    return nullptr;
}

const ComponentSpec *SceneDoc::screen() const {
    for (const auto &c : components) {
        if (c.kind == ComponentKind::Screen) {
            return &c;
        }
    }
    return nullptr;
}

std::string serialize_scene(const SceneDoc &doc) {
    std::ostringstream out;
    out << "scene " << doc.name << '\n';
    for (const auto &r : doc.regions) {
        if (r.is_fiber()) {
            out << "fiber " << r.id;
            if (!r.path.empty()) {
                out << " path=" << r.path;
            }
            out << " length=" << format_double(*r.length);
        } else {
            out << "region " << r.id;
            if (!r.path.empty()) {
                out << " path=" << r.path;
            }
        }
        out << '\n';
    }
    if (doc.source) {
        const auto &s = *doc.source;
        bool unit_amps = s.terms.size() == 1 && s.terms.front().amplitude == 1.0;
        bool zero_phases = true;
        for (const auto &t : s.terms) {
            zero_phases = zero_phases && t.phase == 0.0;
        }
        out << "source " << s.id << " region=" << join(s.terms, ',', [](const auto &t) { return t.region; })
            << " pol=" << join(s.terms, ',', [](const auto &t) { return std::string(to_string(t.polarization)); });
        if (!unit_amps) {
            out << " amp=" << join(s.terms, ',', [](const auto &t) { return format_double(t.amplitude); });
        }
        if (!zero_phases) {
            out << " phase=" << join(s.terms, ',', [](const auto &t) { return format_double(t.phase); });
        }
        out << " time=" << format_double(s.time) << '\n';
    }
    for (const auto &c : doc.components) {
        out << to_string(c.kind) << ' ' << c.id;
        auto between = [&]() { out << " between=" << c.inputs.at(0) << ':' << c.outputs.at(0); };
        switch (c.kind) {
            case ComponentKind::BeamSplitter:
                out << " in=" << c.inputs.at(0) << ',' << c.inputs.at(1) << " out=" << c.outputs.at(0) << ','
                    << c.outputs.at(1);
                break;
            case ComponentKind::PhaseShifter:
                between();
                out << " phi=" << format_double(c.phase);
                break;
            case ComponentKind::Mirror:
                between();
                break;
            case ComponentKind::Polarizer:
                between();
                out << " axis=" << to_string(c.axis);
                break;
            case ComponentKind::PockelsCell:
                if (c.is_inline()) {
                    between();
                } else {
                    out << " region=" << c.location;
                }
                break;
            case ComponentKind::Shutter:
                between();
                out << " response=" << format_double(c.response);
                if (c.initially_closed) {
                    out << " state=closed";
                }
                break;
            case ComponentKind::Detector:
                out << " region=" << c.location;
                break;
            case ComponentKind::Screen: {
                const auto sp = c.screen.value_or(ScreenParams{});
                out << " inputs=" << c.inputs.at(0) << ',' << c.inputs.at(1)
                    << " separation=" << format_double(sp.separation) << " distance=" << format_double(sp.distance)
                    << " wavelength=" << format_double(sp.wavelength) << " sigma=" << format_double(sp.sigma)
                    << " halfwidth=" << format_double(sp.halfwidth) << " bins=" << sp.bins;
                break;
            }
        }
        out << '\n';
    }
    for (const auto &p : doc.passages) {
        out << "passage " << p.id << " between=" << p.a << ':' << p.b << " pass=" << to_string(p.condition) << '\n';
    }
    for (const auto &t : doc.shutter_transitions) {
        out << (t.close ? "close " : "open ") << t.shutter << " at=" << format_double(t.time) << '\n';
    }
    for (const auto &w : doc.pockels_windows) {
        out << "voltage " << w.cell << " on=" << format_double(w.on) << " off=" << format_double(w.off) << '\n';
    }
    out << "constants speed=" << format_double(doc.propagation_speed)
        << " packet=" << format_double(doc.packet_duration) << '\n';
    for (const auto &[key, value] : doc.metadata) {
        out << "meta " << key << " value=" << value << '\n';
    }
    return out.str();
}

}  // namespace topocollapse
