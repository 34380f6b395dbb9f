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

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "topocollapse/error.h"
#include "topocollapse/experiments.h"
#include "topocollapse/timeline.h"

namespace topocollapse {

namespace {

namespace fs = std::filesystem;

// Failure that maps to a specific exit code after its message is printed.
struct CliFailure {
    int code;
    std::string message;
};

struct Options {
    std::string scene;
    std::string policy;
    std::optional<double> phi;
    std::uint64_t trials = 10000;
    std::uint64_t seed = 0;
    int bins = 0;
    std::size_t phi_grid = 16;
    unsigned threads = 0;
    std::string output;
    std::string format = "csv";
    std::string dir;
    std::vector<double> responses;
    std::vector<double> speeds;

    std::optional<double> fiber_length;
    std::optional<double> response;
    std::optional<double> close_fraction;
    std::optional<double> l1;
    std::optional<double> l2;
    std::optional<double> l3;
    std::optional<double> speed;
    std::optional<double> packet;
};

struct LoadedScene {
    SceneDoc doc;
    std::string origin;                          // preset name or file path
    std::optional<ParsedScene> parsed;           // set for files
};

std::string trim_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') {
        s.pop_back();
    }
    return s;
}

std::string echo_line(const LoadedScene &scene, const std::string &subject) {
    if (!scene.parsed || subject.empty()) {
        return "";
    }
    auto it = scene.parsed->line_of.find(subject);
    if (it == scene.parsed->line_of.end() || it->second == 0 || it->second > scene.parsed->lines.size()) {
        return "";
    }
    std::ostringstream out;
    out << "  " << scene.origin << ':' << it->second << ": " << trim_cr(scene.parsed->lines[it->second - 1]) << '\n';
    return out.str();
}

PresetParams preset_params(const Options &o) {
    PresetParams p;
    if (o.phi) {
        p.phi = *o.phi;
    }
    if (o.fiber_length) {
        p.fiber_length = *o.fiber_length;
    }
    if (o.response) {
        p.response = *o.response;
    }
    if (o.close_fraction) {
        p.close_fraction = *o.close_fraction;
    }
    if (o.l1) {
        p.l1 = *o.l1;
    }
    if (o.l2) {
        p.l2 = *o.l2;
    }
    if (o.l3) {
        p.l3 = *o.l3;
    }
    if (o.speed) {
        p.speed = *o.speed;
    }
    if (o.packet) {
        p.packet_duration = *o.packet;
    }
    return p;
}

LoadedScene load_scene(const Options &o) {
    LoadedScene out;
    out.origin = o.scene;
    if (auto kind = parse_preset(o.scene)) {
        try {
            out.doc = preset(*kind, preset_params(o));
        } catch (const ConfigError &e) {
            throw CliFailure{kExitInvalid, std::string("error: ") + e.what()};
        }
        return out;
    }
    std::ifstream in(o.scene, std::ios::binary);
    if (!in) {
        throw CliFailure{kExitInvalid, "error: cannot read scene file '" + o.scene + "' (presets: fig1..fig5)"};
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        out.parsed = parse_scene_annotated(buffer.str());
    } catch (const SceneParseError &e) {
        std::ostringstream msg;
        std::vector<std::string> lines;
        std::istringstream text(buffer.str());
        for (std::string line; std::getline(text, line);) {
            lines.push_back(trim_cr(line));
        }
        for (const auto &d : e.diagnostics()) {
            msg << o.scene << ':' << d.line << ':' << d.column << ": error: " << d.message << '\n';
            if (d.line >= 1 && d.line <= lines.size()) {
                msg << "  " << lines[d.line - 1] << '\n';
            }
        }
        auto s = msg.str();
        s.pop_back();
        throw CliFailure{kExitInvalid, s};
    }
    out.doc = out.parsed->doc;
    if (o.phi) {
        out.doc = with_phase(out.doc, *o.phi);
    }
    return out;
}

// Reports validation errors and timing violations; true when the scene can run.
bool check_scene(const LoadedScene &scene, std::ostream &err, bool show_warnings) {
    auto report = validate_scene(scene.doc);
    for (const auto &issue : report.issues) {
        if (issue.severity == Severity::Warning && !show_warnings) {
            continue;
        }
        err << (issue.severity == Severity::Error ? "error: " : "warning: ");
        if (!issue.subject.empty()) {
            err << issue.subject << ": ";
        }
        err << issue.message << '\n' << echo_line(scene, issue.subject);
    }
    if (report.has_errors()) {
        return false;
    }
    try {
        auto violations = validate_timing(schedule(scene.doc));
        for (const auto &v : violations) {
            err << "error: " << to_string(v.kind) << " violation at " << v.component << " (t=" << format_double(v.time)
                << " s): " << v.detail << '\n'
                << echo_line(scene, v.component);
        }
        return violations.empty();
    } catch (const ConfigError &e) {
        err << "error: " << e.what() << '\n';
        return false;
    }
}

CollapsePolicy policy_or_default(const Options &o) {
    if (o.policy.empty()) {
        return CollapsePolicy::PoV1;
    }
    return *parse_policy(o.policy);
}

std::string phi_text(const std::optional<double> &phi) {
    return phi ? format_double(*phi) : "";
}

void write_pretty(const std::vector<ExperimentResult> &results, std::ostream &out) {
    for (const auto &r : results) {
        out << "policy " << to_string(r.policy) << "  seed " << r.seed << "  trials " << r.trials;
        if (r.phi) {
            out << "  phi " << format_double(*r.phi);
        }
        out << '\n';
        out << std::left << std::setw(10) << "outcome" << std::right << std::setw(12) << "count" << std::setw(14)
            << "frequency" << std::setw(14) << "analytic_p" << '\n';
        auto freq = r.frequencies();
        for (std::size_t k = 0; k < r.outcomes.size(); ++k) {
            out << std::left << std::setw(10) << r.outcomes[k] << std::right << std::setw(12) << r.counts[k]
                << std::setw(14) << std::setprecision(6) << freq[k] << std::setw(14)
                << (k < r.analytic.size() ? r.analytic[k] : 0.0) << '\n';
        }
    }
}

fs::path output_path(const std::string &name) {
    fs::path p(name);
    const char *dir = std::getenv(kOutputDirEnv);
    if (p.is_relative() && dir != nullptr && *dir != '\0') {
        return fs::path(dir) / p;
    }
    return p;
}

// Writes through `emit` to the chosen file, or to `out` when no file is set.
template <typename F>
void with_output(const Options &o, std::ostream &out, F &&emit) {
    if (o.output.empty()) {
        emit(out);
        return;
    }
    auto path = output_path(o.output);
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw CliFailure{kExitInvalid, "error: cannot open output file '" + path.string() + "'"};
    }
    emit(file);
    file.flush();
    if (!file) {
        throw CliFailure{kExitInvalid, "error: failed writing '" + path.string() + "'"};
    }
}

void emit_results(const Options &o, const std::vector<ExperimentResult> &results, std::ostream &out) {
    with_output(o, out, [&](std::ostream &s) {
        if (o.format == "pretty") {
            write_pretty(results, s);
        } else {
            write_csv(results, s);
        }
    });
}

RunConfig make_config(const Options &o) {
    RunConfig cfg;
    cfg.trials = o.trials;
    cfg.seed = o.seed;
    cfg.policy = policy_or_default(o);
    cfg.bins = o.bins;
    return cfg;
}

int cmd_run(const Options &o, std::ostream &out, std::ostream &err) {
    auto scene = load_scene(o);
    if (!check_scene(scene, err, false)) {
        return kExitInvalid;
    }
    auto cfg = make_config(o);
    auto result = scene.doc.screen() != nullptr ? screen_histogram(cfg, scene.doc) : run_trials(cfg, scene.doc);
    emit_results(o, {result}, out);
    return kExitOk;
}

int cmd_sweep(const Options &o, std::ostream &out, std::ostream &err) {
    if (o.phi_grid < 2) {
        throw CliFailure{kExitUsage, "error: --phi-grid needs at least 2 points"};
    }
    auto scene = load_scene(o);
    if (!check_scene(scene, err, false)) {
        return kExitInvalid;
    }
    if (!scene_phase(scene.doc)) {
        err << "error: scene '" << scene.origin << "' has no phase shifter to sweep\n";
        return kExitInvalid;
    }
    auto cfg = make_config(o);
    cfg.sweep = phase_grid(o.phi_grid);
    auto results = run_sweep(cfg, scene.doc, o.threads);
    emit_results(o, results, out);
    for (const auto &label : results.front().outcomes) {
        if (label == "loss") {
            continue;
        }
        try {
            err << "visibility " << label << ": " << format_double(sweep_visibility(results, label)) << '\n';
        } catch (const std::domain_error &) {
            err << "visibility " << label << ": undefined (no counts)\n";
        }
    }
    return kExitOk;
}

int cmd_analytic(const Options &o, std::ostream &out, std::ostream &err) {
    auto scene = load_scene(o);
    if (!check_scene(scene, err, false)) {
        return kExitInvalid;
    }
    std::vector<CollapsePolicy> policies;
    if (o.policy.empty()) {
        policies.assign(std::begin(kAllPolicies), std::end(kAllPolicies));
    } else {
        policies.push_back(*parse_policy(o.policy));
    }
    const auto phi = phi_text(scene_phase(scene.doc));
    with_output(o, out, [&](std::ostream &s) {
        s << "phi,policy,outcome,analytic_p\n";
        for (auto policy : policies) {
            std::vector<std::string> labels;
            std::vector<double> probs;
            if (const auto *screen = scene.doc.screen(); screen != nullptr && screen->screen) {
                auto params = *screen->screen;
                if (o.bins != 0) {
                    params.bins = o.bins;
                }
                ScreenModel model(params);
                probs = model.bin_masses(ScreenModel::policy_state(policy));
                double total = 0.0;
                for (double p : probs) {
                    total += p;
                }
                for (std::size_t b = 0; b < probs.size(); ++b) {
                    labels.push_back("bin" + std::to_string(b));
                    probs[b] /= total;
                }
            } else {
                labels = outcome_labels(scene.doc);
                probs = analytic_outcomes(scene.doc, policy, labels);
            }
            for (std::size_t k = 0; k < labels.size(); ++k) {
                s << phi << ',' << to_string(policy) << ',' << labels[k] << ',' << format_double(probs[k]) << '\n';
            }
        }
    });
    return kExitOk;
}

int cmd_validate(const Options &o, std::ostream &out, std::ostream &err) {
    auto scene = load_scene(o);
    bool ok = check_scene(scene, err, true);
    auto report = validate_scene(scene.doc);
    out << scene.origin << ": " << (ok ? "ok" : "invalid") << " (" << report.error_count() << " errors, "
        << report.warning_count() << " warnings)\n";
    return ok ? kExitOk : kExitInvalid;
}

int cmd_feasibility(const Options &o, std::ostream &out, std::ostream &) {
    std::vector<double> speeds = o.speeds.empty() ? std::vector<double>{kSpeedOfLight} : o.speeds;
    std::vector<std::array<double, 3>> rows;
    for (double r : o.responses) {
        for (double v : speeds) {
            try {
                rows.push_back({r, v, min_separation(r, v)});
            } catch (const ConfigError &e) {
                throw CliFailure{kExitInvalid, std::string("error: ") + e.what()};
            }
        }
    }
    with_output(o, out, [&](std::ostream &s) {
        if (o.format == "pretty") {
            for (const auto &[r, v, m] : rows) {
                s << "response " << format_double(r) << " s at " << format_double(v) << " m/s needs more than "
                  << format_double(m) << " m between shutters\n";
            }
            return;
        }
        s << "response_s,speed_m_per_s,min_separation_m\n";
        for (const auto &[r, v, m] : rows) {
            s << format_double(r) << ',' << format_double(v) << ',' << format_double(m) << '\n';
        }
    });
    return kExitOk;
}

int cmd_presets(const Options &o, std::ostream &out, std::ostream &) {
    fs::path dir = o.dir;
    if (dir.empty()) {
        const char *env = std::getenv(kOutputDirEnv);
        dir = env != nullptr && *env != '\0' ? fs::path(env) : fs::path("scenes");
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw CliFailure{kExitInvalid, "error: cannot create directory '" + dir.string() + "': " + ec.message()};
    }
    for (auto kind : kAllPresets) {
        auto path = dir / (std::string(to_string(kind)) + ".scene");
        std::ofstream file(path, std::ios::binary | std::ios::trunc);
        file << serialize_scene(preset(kind));
        file.flush();
        if (!file) {
            throw CliFailure{kExitInvalid, "error: failed writing '" + path.string() + "'"};
        }
        out << path.string() << '\n';
    }
    return kExitOk;
}

}  // namespace

void write_csv(const std::vector<ExperimentResult> &results, std::ostream &out) {
    if (results.empty()) {
        throw ConfigError("no results to write");
    }
    out << kCsvHeader << '\n';
    for (const auto &r : results) {
        auto freq = r.frequencies();
        for (std::size_t k = 0; k < r.outcomes.size(); ++k) {
            out << phi_text(r.phi) << ',' << to_string(r.policy) << ',' << r.seed << ',' << r.trials << ','
                << r.outcomes[k] << ',' << r.counts[k] << ',' << format_double(freq[k]) << ','
                << (k < r.analytic.size() ? format_double(r.analytic[k]) : "") << '\n';
        }
    }
}

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Topology-change collapse simulator", "topocollapse"};
    app.require_subcommand(1);
    Options o;

    const auto policy_check = CLI::IsMember({"pov1", "pov2-strong", "pov2-weak"});
    const auto format_check = CLI::IsMember({"csv", "pretty"});
    auto add_scene = [&](CLI::App *cmd) {
        cmd->add_option("--scene", o.scene, "Preset name (fig1..fig5) or .scene file")->required();
        cmd->add_option("--phi", o.phi, "Phase shift in radians");
        cmd->add_option("--fiber-length", o.fiber_length, "Fiber between shutters in meters (fig3, fig4)");
        cmd->add_option("--response", o.response, "Shutter response time in seconds (fig3, fig4)");
        cmd->add_option("--close-fraction", o.close_fraction, "Shutter cycle position between shutters (fig3, fig4)");
        cmd->add_option("--l1", o.l1, "First segment length in meters (fig5)");
        cmd->add_option("--l2", o.l2, "Second segment length in meters (fig5)");
        cmd->add_option("--l3", o.l3, "Third segment length in meters (fig5)");
        cmd->add_option("--speed", o.speed, "Propagation speed in m/s (presets)");
        cmd->add_option("--packet", o.packet, "Packet duration in seconds (presets)");
    };
    auto add_sampling = [&](CLI::App *cmd, bool policy_required) {
        auto *policy = cmd->add_option("--policy", o.policy, "pov1, pov2-strong or pov2-weak")->check(policy_check);
        if (policy_required) {
            policy->required();
        }
        cmd->add_option("--trials", o.trials, "Trials per run")->check(CLI::PositiveNumber);
        cmd->add_option("--seed", o.seed, "RNG seed");
        cmd->add_option("--bins", o.bins, "Screen bins")->check(CLI::Range(2, 1000000));
        cmd->add_option("-o,--output", o.output, "Output file (default: standard output)");
        cmd->add_option("--format", o.format, "csv or pretty")->check(format_check);
    };

    auto *run = app.add_subcommand("run", "Sample one experiment");
    add_scene(run);
    add_sampling(run, false);

    auto *sweep = app.add_subcommand("sweep", "Sample over a uniform phase grid");
    add_scene(sweep);
    add_sampling(sweep, false);
    sweep->add_option("--phi-grid", o.phi_grid, "Number of grid points over [0, 2 pi)");
    sweep->add_option("--threads", o.threads, "Worker threads (0: hardware count)");

    auto *analytic = app.add_subcommand("analytic", "Closed-form predictions, no sampling");
    add_scene(analytic);
    analytic->add_option("--policy", o.policy, "pov1, pov2-strong or pov2-weak (default: all)")->check(policy_check);
    analytic->add_option("--bins", o.bins, "Screen bins")->check(CLI::Range(2, 1000000));
    analytic->add_option("-o,--output", o.output, "Output file (default: standard output)");

    auto *validate_cmd = app.add_subcommand("validate", "Check a scene and its timing");
    add_scene(validate_cmd);

    auto *feasibility = app.add_subcommand("feasibility", "Minimum fiber length between shutters");
    feasibility->add_option("--response", o.responses, "Shutter response times in seconds")->required();
    feasibility->add_option("--speed", o.speeds, "Propagation speeds in m/s (default: c)");
    feasibility->add_option("-o,--output", o.output, "Output file (default: standard output)");
    feasibility->add_option("--format", o.format, "csv or pretty")->check(format_check);

    auto *presets = app.add_subcommand("presets", "Write the five preset .scene files");
    presets->add_option("--dir", o.dir, "Target directory (default: $TOPOCOLLAPSE_OUTPUT_DIR or ./scenes)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (run->parsed()) {
            return cmd_run(o, out, err);
        }
        if (sweep->parsed()) {
            return cmd_sweep(o, out, err);
        }
        if (analytic->parsed()) {
            return cmd_analytic(o, out, err);
        }
        if (validate_cmd->parsed()) {
            return cmd_validate(o, out, err);
        }
        if (feasibility->parsed()) {
            return cmd_feasibility(o, out, err);
        }
        if (presets->parsed()) {
            return cmd_presets(o, out, err);
        }
    } catch (const CliFailure &f) {
        err << f.message << '\n';
        return f.code;
    } catch (const TimingError &e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const ConfigError &e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::domain_error &e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    }
    return kExitUsage;
}

}  // namespace topocollapse
