// Copyright 2026 The ramsec Authors
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

#include "ramsec/run.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gtest/gtest.h"

using namespace ramsec;
using namespace ramsec::harness;
namespace fs = std::filesystem;

namespace {

ScenarioErrorKind parse_error_kind(std::string_view text, std::string *field = nullptr) {
    try {
        parse_scenario(text);
    } catch (const ScenarioError &e) {
        if (field) {
            *field = e.field();
        }
        return e.kind();
    }
    ADD_FAILURE() << "parsed without error: " << text;
    return ScenarioErrorKind::malformed_input;
}

std::string slurp(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

class TempDir {
public:
    TempDir() {
        auto base = fs::temp_directory_path() / "ramsec_test_XXXXXX";
        std::string tmpl = base.string();
        if (!mkdtemp(tmpl.data())) {
            throw std::runtime_error("mkdtemp failed");
        }
        path_ = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    const fs::path &path() const {
        return path_;
    }
    fs::path write(const std::string &name, const std::string &content) const {
        auto p = path_ / name;
        std::ofstream(p, std::ios::binary) << content;
        return p;
    }

private:
    fs::path path_;
};

int run_cli(const std::string &args) {
    std::string cmd = std::string(RAMSEC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::vector<double>> read_csv(const fs::path &path, std::string *header = nullptr) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    if (header) {
        *header = line;
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            row.push_back(std::stod(cell));
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

TEST(ParseScenario, minimal_normal_flop_uses_reference_frames) {
    auto parsed = parse_scenario(R"({"mode": "normal"})");
    const Scenario &s = parsed.scenario;
    EXPECT_EQ(s.mode, Mode::normal);
    EXPECT_EQ(s.name, "normal");
    EXPECT_EQ(s.frames.resolve().delta_w, two_pi * 100);
    EXPECT_EQ(s.frames.resolve().delta_s, two_pi * 100);
    EXPECT_NEAR(s.timing.t2_s, 5e-3, 1e-18);
    EXPECT_NEAR(s.grid.t_stop_s, 0.02, 1e-18);
    EXPECT_EQ(s.grid.t_points, 201u);
    EXPECT_TRUE(parsed.warnings.empty());
}

TEST(ParseScenario, angles_are_in_units_of_pi) {
    auto s = parse_scenario(R"({"mode": "scrambled", "pulses": {"scramble_area_pi": 0.5},
                                "frames": {"phi_s_pi": 1.5}})")
                 .scenario;
    EXPECT_EQ(s.protocol().scramble_area, pi / 2);
    EXPECT_EQ(s.frames.resolve().phi_s, reduce_angle(1.5 * pi));
}

TEST(ParseScenario, error_kinds_are_distinct) {
    std::string field;
    EXPECT_EQ(parse_error_kind(""), ScenarioErrorKind::malformed_input);
    EXPECT_EQ(parse_error_kind("{\"mode\": "), ScenarioErrorKind::malformed_input);
    EXPECT_EQ(parse_error_kind("[1, 2]"), ScenarioErrorKind::malformed_input);
    EXPECT_EQ(parse_error_kind("{}", &field), ScenarioErrorKind::missing_field);
    EXPECT_EQ(field, "mode");
    EXPECT_EQ(parse_error_kind(R"({"mode": "teleport"})"), ScenarioErrorKind::unknown_mode);
    EXPECT_EQ(parse_error_kind(R"({"mode": "sdbv"})", &field), ScenarioErrorKind::missing_field);
    EXPECT_EQ(field, "recorded");
    EXPECT_EQ(parse_error_kind(R"({"mode": "secure-choice"})", &field), ScenarioErrorKind::missing_field);
    EXPECT_EQ(field, "choice");
    EXPECT_EQ(parse_error_kind(R"({"mode": "normal", "grid": {"t_points": 0}})", &field),
              ScenarioErrorKind::invalid_field);
    EXPECT_EQ(field, "grid.t_points");
    EXPECT_EQ(parse_error_kind(R"({"mode": "normal", "timing": {"t1_s": -1}})", &field),
              ScenarioErrorKind::invalid_field);
    EXPECT_EQ(field, "timing.t1_s");
    EXPECT_EQ(parse_error_kind(R"({"mode": "normal", "frames": {"delta_w": 100}})", &field),
              ScenarioErrorKind::invalid_field);
    EXPECT_EQ(field, "frames.delta_w");
    EXPECT_EQ(parse_error_kind(R"({"mode": "normal", "grid": {"t_points": "many"}})", &field),
              ScenarioErrorKind::invalid_field);
    EXPECT_EQ(parse_error_kind(R"({"mode": "sdbv", "recorded": {"x": 0.5, "y": 0, "z": 0}})", &field),
              ScenarioErrorKind::invalid_field);
    EXPECT_EQ(field, "recorded");
    EXPECT_EQ(parse_error_kind(R"({"mode": "normal", "schema_version": 2})", &field),
              ScenarioErrorKind::invalid_field);
    EXPECT_EQ(parse_error_kind(R"({"mode": "fit", "noise": {"atom_count": 0}})", &field),
              ScenarioErrorKind::invalid_field);
    EXPECT_EQ(field, "noise.atom_count");
}

TEST(ParseScenario, retrieved_with_quarter_turn_t2_warns_but_parses) {
    // delta_S T2 = π/2 at 100 Hz: T2 = 1.25 ms.
    auto parsed = parse_scenario(R"({"mode": "retrieved", "timing": {"t2_s": 0.00125}})");
    ASSERT_EQ(parsed.warnings.size(), 1u);
    EXPECT_NE(parsed.warnings[0].find("timing.t2_s"), std::string::npos);
    EXPECT_TRUE(parse_scenario(R"({"mode": "retrieved", "timing": {"t2_s": 0.015}})").warnings.empty());
}

TEST(ParseScenario, secure_choice_resolves_read_delay) {
    auto s = parse_scenario(R"({"mode": "secure-choice", "choice": "no", "timing": {"t1_s": 0.002}})").scenario;
    EXPECT_EQ(s.choice, Choice::no);
    double phase = s.frames.resolve().delta_w * (s.timing.t1_s + s.timing.t2_s + s.timing.t3_s);
    EXPECT_LE(wrap_distance(phase), 1e-9);
}

TEST(ParseScenario, round_trip_is_identity) {
    const char *docs[] = {
        R"({"mode": "normal"})",
        R"({"mode": "retrieved", "name": "r", "timing": {"t1_s": 0.003, "t2_s": 0.00125}, "grid": {"t_points": 7}})",
        R"({"mode": "sdbv", "recorded": {"x": 0.6, "y": 0.0, "z": 0.8}, "wait_phase_pi": 0.25})",
        R"({"mode": "ambiguity-sweep", "recorded": "e", "sweep": {"theta_points": 5}})",
        R"({"mode": "optimize", "recorded": "g", "optimizer": {"tolerance": 1e-7, "scan_points": 721}})",
        R"({"mode": "secure-choice", "choice": "no", "frames": {"phi_s_pi": 0.3}})",
        R"({"mode": "fit", "noise": {"atom_count": 1000, "contrast_decay_tau_s": 0.5, "phase_jitter_sigma": 0.01,
             "seed": 18446744073709551615}, "trials": 3, "fit": {"flop": "scrambled", "redraw_phi": false},
             "output": {"dir": "out/x", "format": "json"}})",
    };
    for (const char *doc : docs) {
        auto first = parse_scenario(doc);
        auto again = parse_scenario(emit_scenario(first.scenario));
        EXPECT_EQ(again.scenario, first.scenario) << doc;
        EXPECT_EQ(emit_scenario(again.scenario), emit_scenario(first.scenario));
    }
}

TEST(RunScenario, retrieved_defaults_have_no_spread) {
    TempDir tmp;
    auto s = parse_scenario(R"({"mode": "retrieved", "grid": {"phi_samples": 32}})").scenario;
    s.output.dir = tmp.path().string();
    auto outcome = run_scenario(s);
    ASSERT_EQ(outcome.exit_code, exit_ok) << outcome.message;
    std::string header;
    auto rows = read_csv(tmp.path() / "retrieved.csv", &header);
    EXPECT_EQ(header, "T_seconds,T_normalized,phi_S,P_e");
    ASSERT_EQ(rows.size(), 32u * 201u);
    for (size_t j = 0; j < 201; ++j) {
        double lo = 1, hi = 0;
        for (size_t i = 0; i < 32; ++i) {
            double p = rows[i * 201 + j][3];
            lo = std::min(lo, p);
            hi = std::max(hi, p);
        }
        EXPECT_LE(hi - lo, 1e-9);
    }
    EXPECT_NEAR(rows[200][1], 2.0, 1e-12);
    auto report = json::parse(slurp(tmp.path() / "retrieved.report.json"));
    EXPECT_LE(report["summary"]["max_spread"].get<double>(), 1e-9);
    EXPECT_EQ(parse_scenario(report["config"].dump()).scenario, s);
}

TEST(RunScenario, secure_choice_reports_full_excitation) {
    TempDir tmp;
    auto s = parse_scenario(R"({"mode": "secure-choice", "choice": "yes", "frames": {"phi_s_pi": 0.37}})").scenario;
    s.output.dir = tmp.path().string();
    s.output.format = OutputFormat::json;
    ASSERT_EQ(run_scenario(s).exit_code, exit_ok);
    auto report = json::parse(slurp(tmp.path() / "secure-choice.json"));
    EXPECT_NEAR(report["summary"]["P_e"].get<double>(), 1.0, 1e-9);
    EXPECT_EQ(report["summary"]["decoded"], "yes");
    EXPECT_LE(report["summary"]["secrecy_gap"].get<double>(), 1e-9);
    EXPECT_EQ(report["config"]["choice"], "yes");
}

TEST(RunScenario, misconfigured_secure_choice_is_a_runtime_error) {
    TempDir tmp;
    auto s = parse_scenario(R"({"mode": "secure-choice", "choice": "yes", "timing": {"t2_s": 0.004}})").scenario;
    s.output.dir = tmp.path().string();
    auto outcome = run_scenario(s);
    EXPECT_EQ(outcome.exit_code, exit_runtime);
    EXPECT_NE(outcome.message.find("secure-choice"), std::string::npos);
    EXPECT_TRUE(outcome.files.empty());
}

TEST(RunScenario, sdbv_writes_points_and_projection) {
    TempDir tmp;
    auto s = parse_scenario(R"({"mode": "sdbv", "recorded": "e", "pulses": {"scramble_area_pi": 0.5},
                                "grid": {"phi_samples": 64}})")
                 .scenario;
    s.output.dir = tmp.path().string();
    ASSERT_EQ(run_scenario(s).exit_code, exit_ok);
    std::string header;
    auto rows = read_csv(tmp.path() / "sdbv.csv", &header);
    EXPECT_EQ(header, "phi_S,x,y,z");
    ASSERT_EQ(rows.size(), 64u);
    for (const auto &r : rows) {
        EXPECT_LE(std::abs(r[3]), 1e-9);
    }
    auto proj = read_csv(tmp.path() / "sdbv.projection.csv", &header);
    EXPECT_EQ(header, "phi_S,x,z");
    EXPECT_EQ(proj.size(), 64u);
}

TEST(RunScenario, fit_of_normal_flop_recovers_frequency) {
    TempDir tmp;
    auto s = parse_scenario(R"({"mode": "fit", "noise": {"atom_count": 10000, "seed": 3}})").scenario;
    s.output.dir = tmp.path().string();
    ASSERT_EQ(run_scenario(s).exit_code, exit_ok);
    auto report = json::parse(slurp(tmp.path() / "fit.report.json"));
    EXPECT_NEAR(report["summary"]["fit"]["omega"].get<double>() / (two_pi * 100), 1.0, 0.01);
    EXPECT_FALSE(report["summary"]["fit"]["degenerate_amplitude"].get<bool>());
}

TEST(Cli, exit_codes) {
    TempDir tmp;
    std::string out = " --out " + tmp.path().string();
    EXPECT_EQ(run_cli("flop" + out), 0);
    EXPECT_EQ(run_cli("secure-choice --format json" + out), 0);
    EXPECT_EQ(run_cli(""), 2);
    EXPECT_EQ(run_cli("teleport"), 2);
    EXPECT_EQ(run_cli("flop --format xml" + out), 2);
    EXPECT_EQ(run_cli("flop --config " + tmp.path().string() + "/missing.json"), 2);
    auto empty = tmp.write("empty.json", "");
    EXPECT_EQ(run_cli("flop --config " + empty.string() + out), 2);
    auto no_grid = tmp.write("no_grid.json", R"({"mode": "normal", "grid": {"t_points": 0}})");
    EXPECT_EQ(run_cli("flop --config " + no_grid.string() + out), 2);
    auto wrong_sub = tmp.write("wrong.json", R"({"mode": "sdbv", "recorded": "g"})");
    EXPECT_EQ(run_cli("flop --config " + wrong_sub.string() + out), 2);
    auto bad_timing = tmp.write("bad.json", R"({"mode": "secure-choice", "choice": "no", "timing": {"t2_s": 0.004}})");
    EXPECT_EQ(run_cli("secure-choice --config " + bad_timing.string() + out), 3);
    auto stuck = tmp.write("stuck.json", R"({"mode": "fit", "grid": {"t_points": 3}})");
    EXPECT_EQ(run_cli("fit --config " + stuck.string() + out), 3);
}

TEST(Cli, reruns_are_byte_identical) {
    // The report records the output directory, so both runs write to the
    // same place and the first run's files are moved aside.
    TempDir tmp;
    auto cfg = tmp.write("noisy.json", R"({"mode": "fit", "name": "noisy", "grid": {"t_points": 41},
        "noise": {"atom_count": 500, "phase_jitter_sigma": 0.05, "contrast_decay_tau_s": 0.05},
        "fit": {"flop": "scrambled"}, "trials": 4})");
    auto out = tmp.path() / "out";
    auto first = tmp.path() / "first";
    auto run = [&](int seed) { return run_cli("fit --config " + cfg.string() + " --seed " + std::to_string(seed) + " --out " + out.string()); };
    ASSERT_EQ(run(11), 0);
    fs::rename(out, first);
    ASSERT_EQ(run(11), 0);
    EXPECT_EQ(slurp(first / "noisy.csv"), slurp(out / "noisy.csv"));
    EXPECT_EQ(slurp(first / "noisy.report.json"), slurp(out / "noisy.report.json"));
    auto report = json::parse(slurp(out / "noisy.report.json"));
    EXPECT_EQ(report["config"]["noise"]["seed"], 11);
    ASSERT_EQ(run(12), 0);
    EXPECT_NE(slurp(first / "noisy.csv"), slurp(out / "noisy.csv"));
}

TEST(Cli, normal_flop_matches_golden_file) {
    TempDir tmp;
    auto cfg = tmp.write("golden.json", R"({"mode": "normal", "name": "golden_normal", "grid": {"t_points": 9}})");
    ASSERT_EQ(run_cli("flop --config " + cfg.string() + " --out " + tmp.path().string()), 0);
    fs::path golden = fs::path(RAMSEC_SOURCE_DIR) / "tests" / "golden";
    EXPECT_EQ(slurp(tmp.path() / "golden_normal.csv"), slurp(golden / "golden_normal.csv"));
}

TEST(Cli, shipped_scenarios_parse) {
    fs::path dir = fs::path(RAMSEC_SOURCE_DIR) / "scenarios";
    size_t count = 0;
    for (const auto &entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() != ".json") {
            continue;
        }
        ++count;
        EXPECT_NO_THROW(parse_scenario(slurp(entry.path()))) << entry.path();
    }
    EXPECT_GE(count, 8u);
}
