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


#include "topocollapse/cli.h"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

#include "topocollapse/error.h"
#include "topocollapse/experiments.h"

namespace topocollapse {
namespace {

namespace fs = std::filesystem;

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome cli(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines_of(const std::string &text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        out.push_back(line);
    }
    return out;
}

fs::path scratch_dir(const std::string &name) {
    auto dir = fs::temp_directory_path() / ("topocollapse_cli_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

TEST(cli, run_prints_the_discriminating_row) {
    auto r = cli({"run", "--scene", "fig4", "--policy", "pov1", "--trials", "10000", "--seed", "7"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    auto lines = lines_of(r.out);
    ASSERT_EQ(lines.size(), 4u);
    EXPECT_EQ(lines[0], kCsvHeader);
    EXPECT_EQ(lines[1], "0,pov1,7,10000,x,0,0,0");
    EXPECT_EQ(lines[2], "0,pov1,7,10000,y,10000,1,1");
    EXPECT_EQ(lines[3], "0,pov1,7,10000,loss,0,0,0");
}

TEST(cli, repeated_runs_write_identical_files) {
    auto dir = scratch_dir("repeat");
    for (const char *name : {"a.csv", "b.csv"}) {
        auto r = cli({"run", "--scene", "fig4", "--policy", "pov2-strong", "--phi", "0.7", "--trials", "5000",
                      "--seed", "11", "-o", (dir / name).string()});
        ASSERT_EQ(r.code, kExitOk) << r.err;
    }
    auto a = slurp(dir / "a.csv");
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, slurp(dir / "b.csv"));
    EXPECT_EQ(a.find('\r'), std::string::npos);
    fs::remove_all(dir);
}

TEST(cli, relative_output_goes_to_the_environment_directory) {
    auto dir = scratch_dir("env");
    ::setenv(kOutputDirEnv, dir.c_str(), 1);
    auto r = cli({"run", "--scene", "fig4", "--trials", "10", "-o", "result.csv"});
    ::unsetenv(kOutputDirEnv);
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_TRUE(fs::exists(dir / "result.csv"));
    fs::remove_all(dir);
}

TEST(cli, analytic_has_no_sampling) {
    auto r = cli({"analytic", "--scene", "fig4", "--policy", "pov2-strong", "--phi", "0"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    auto lines = lines_of(r.out);
    ASSERT_GE(lines.size(), 3u);
    EXPECT_EQ(lines[0], "phi,policy,outcome,analytic_p");
    EXPECT_EQ(lines[1], "0,pov2-strong,x,0.5");
    EXPECT_EQ(lines[2], "0,pov2-strong,y,0.5");
    auto all = cli({"analytic", "--scene", "fig4"});
    ASSERT_EQ(all.code, kExitOk);
    EXPECT_EQ(lines_of(all.out).size(), 1u + 3u * 3u);
    EXPECT_EQ(all.out, cli({"analytic", "--scene", "fig4"}).out);
}

TEST(cli, sweep_reports_sixteen_points_and_visibility) {
    auto r = cli({"sweep", "--scene", "fig4", "--policy", "pov1", "--phi-grid", "16", "--trials", "100000", "--seed",
                  "7"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    auto lines = lines_of(r.out);
    EXPECT_EQ(lines.size(), 1u + 16u * 3u);
    std::set<std::string> phis;
    for (std::size_t k = 1; k < lines.size(); ++k) {
        phis.insert(lines[k].substr(0, lines[k].find(',')));
    }
    EXPECT_EQ(phis.size(), 16u);
    auto pos = r.err.find("visibility x: ");
    ASSERT_NE(pos, std::string::npos) << r.err;
    EXPECT_GE(std::stod(r.err.substr(pos + 14)), 0.99);
}

TEST(cli, feasibility_table) {
    auto r = cli({"feasibility", "--response", "1e-6", "--speed", "3e8", "10"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    auto lines = lines_of(r.out);
    ASSERT_EQ(lines.size(), 3u);
    EXPECT_EQ(lines[0], "response_s,speed_m_per_s,min_separation_m");
    EXPECT_EQ(lines[1], "1e-06,3e+08,300");
    EXPECT_EQ(lines[2], "1e-06,10,1e-05");
}

TEST(cli, usage_errors_exit_with_two) {
    EXPECT_EQ(cli({}).code, kExitUsage);
    EXPECT_EQ(cli({"run"}).code, kExitUsage);
    EXPECT_EQ(cli({"launch", "--scene", "fig4"}).code, kExitUsage);
    EXPECT_EQ(cli({"run", "--scene", "fig4", "--policy", "pov3"}).code, kExitUsage);
    EXPECT_EQ(cli({"run", "--scene", "fig4", "--trials", "0"}).code, kExitUsage);
    EXPECT_EQ(cli({"run", "--scene", "fig4", "--format", "xml"}).code, kExitUsage);
    EXPECT_EQ(cli({"feasibility"}).code, kExitUsage);
}

TEST(cli, missing_scene_file_is_an_input_error) {
    auto r = cli({"run", "--scene", "no/such/file.scene"});
    EXPECT_EQ(r.code, kExitInvalid);
    EXPECT_FALSE(r.err.empty());
}

TEST(cli, timing_violations_exit_with_one) {
    auto r = cli({"run", "--scene", "fig4", "--fiber-length", "200"});
    EXPECT_EQ(r.code, kExitInvalid);
    EXPECT_NE(r.err.find("contact"), std::string::npos) << r.err;
}

TEST(cli, invalid_scene_files_echo_the_line) {
    auto dir = scratch_dir("invalid");
    auto path = dir / "bad.scene";
    std::ofstream(path) << "region a\nsource S0 region=a pol=V\nfiber f path=a length=oops\n";
    auto r = cli({"validate", "--scene", path.string()});
    EXPECT_EQ(r.code, kExitInvalid);
    EXPECT_NE(r.err.find(":3:"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("fiber f path=a length=oops"), std::string::npos) << r.err;

    std::ofstream(path) << "fiber a path=x length=10\nsource S0 region=a pol=V amp=0.5\n";
    r = cli({"validate", "--scene", path.string()});
    EXPECT_EQ(r.code, kExitInvalid);
    EXPECT_NE(r.err.find("source S0 region=a pol=V amp=0.5"), std::string::npos) << r.err;
    fs::remove_all(dir);
}

TEST(cli, validate_accepts_presets) {
    for (auto kind : kAllPresets) {
        auto r = cli({"validate", "--scene", std::string(to_string(kind))});
        EXPECT_EQ(r.code, kExitOk) << r.err;
        EXPECT_NE(r.out.find(": ok"), std::string::npos);
    }
}

TEST(cli, presets_command_writes_parseable_files) {
    auto dir = scratch_dir("presets");
    auto r = cli({"presets", "--dir", dir.string()});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    for (auto kind : kAllPresets) {
        auto path = dir / (std::string(to_string(kind)) + ".scene");
        ASSERT_TRUE(fs::exists(path));
        EXPECT_EQ(parse_scene(slurp(path)), preset(kind));
        auto run = cli({"validate", "--scene", path.string()});
        EXPECT_EQ(run.code, kExitOk) << run.err;
    }
    fs::remove_all(dir);
}

TEST(cli, scene_files_run_like_presets) {
    auto dir = scratch_dir("file");
    auto path = dir / "fig4.scene";
    std::ofstream(path) << serialize_scene(preset(PresetKind::Fig4));
    auto from_file = cli({"run", "--scene", path.string(), "--trials", "2000", "--seed", "3"});
    auto from_preset = cli({"run", "--scene", "fig4", "--trials", "2000", "--seed", "3"});
    EXPECT_EQ(from_file.code, kExitOk) << from_file.err;
    EXPECT_EQ(from_file.out, from_preset.out);
    fs::remove_all(dir);
}

TEST(cli, pretty_format) {
    auto r = cli({"run", "--scene", "fig4", "--trials", "100", "--format", "pretty"});
    ASSERT_EQ(r.code, kExitOk);
    EXPECT_NE(r.out.find("analytic_p"), std::string::npos);
    EXPECT_EQ(r.out.find(kCsvHeader), std::string::npos);
}

TEST(cli, write_csv_refuses_empty_results) {
    std::ostringstream out;
    EXPECT_THROW(write_csv({}, out), ConfigError);
    EXPECT_TRUE(out.str().empty());
}

TEST(cli, screen_runs_emit_bins) {
    auto r = cli({"run", "--scene", "fig3", "--trials", "1000", "--bins", "8"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_EQ(lines_of(r.out).size(), 1u + 9u);
    EXPECT_NE(r.out.find(",bin7,"), std::string::npos);
}

}  // namespace
}  // namespace topocollapse
