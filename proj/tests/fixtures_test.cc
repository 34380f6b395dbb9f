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


#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "topocollapse/experiments.h"
#include "topocollapse/timeline.h"

namespace topocollapse {
namespace {

std::string fixture(PresetKind kind) {
    auto path = std::filesystem::path(TOPOCOLLAPSE_SCENES_DIR) / (std::string(to_string(kind)) + ".scene");
    std::ifstream in(path, std::ios::binary);
    EXPECT_TRUE(in.good()) << path;
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

TEST(fixtures, shipped_scenes_match_the_presets) {
    for (auto kind : kAllPresets) {
        auto text = fixture(kind);
        EXPECT_EQ(text, serialize_scene(preset(kind))) << to_string(kind);
        EXPECT_EQ(parse_scene(text), preset(kind)) << to_string(kind);
    }
}

TEST(fixtures, shipped_scenes_simulate_like_the_presets) {
    for (auto kind : kAllPresets) {
        auto doc = parse_scene(fixture(kind));
        Simulator from_file(doc);
        Simulator from_code(preset(kind));
        for (auto policy : kAllPolicies) {
            EXPECT_EQ(from_file.execute(policy).entries(), from_code.execute(policy).entries());
        }
    }
}

}  // namespace
}  // namespace topocollapse
