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

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "ramsec/run.hpp"

using namespace ramsec::harness;

namespace {

struct Subcommand {
    const char *name;
    const char *help;
    const char *default_doc;  // used when no --config is given
    std::vector<Mode> modes;
};

const std::vector<Subcommand> &subcommands() {
    static const std::vector<Subcommand> table = {
        {"flop", "Normal, scrambled or retrieved Ramsey flop", R"({"mode": "normal"})",
         {Mode::normal, Mode::scrambled, Mode::retrieved}},
        {"sdbv", "Scrambled Bloch-vector distribution and its xz projection",
         R"({"mode": "sdbv", "recorded": "plus"})", {Mode::sdbv}},
        {"ambiguity", "Phase ambiguity versus scramble pulse area",
         R"({"mode": "ambiguity-sweep", "recorded": "plus"})", {Mode::ambiguity_sweep}},
        {"optimize", "Scramble pulse area maximizing the phase ambiguity",
         R"({"mode": "optimize", "recorded": "plus"})", {Mode::optimize}},
        {"secure-choice", "Secure yes/no record, scramble and readout",
         R"({"mode": "secure-choice", "choice": "yes"})", {Mode::secure_choice}},
        {"fit", "Emulated noisy flop with damped-sinusoid fit",
         R"({"mode": "fit", "noise": {"atom_count": 10000, "seed": 1}})", {Mode::fit}},
    };
    return table;
}

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ScenarioError(ScenarioErrorKind::malformed_input, "--config", "cannot read " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Ramsey secure quantum memory simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> format;

    std::vector<std::pair<CLI::App *, const Subcommand *>> registered;
    for (const auto &sub : subcommands()) {
        CLI::App *cmd = app.add_subcommand(sub.name, sub.help);
        cmd->add_option("--config", config_path, "Scenario JSON file")->check(CLI::ExistingFile);
        cmd->add_option("--seed", seed, "Override noise.seed");
        cmd->add_option("--out", out_dir, "Override output.dir");
        cmd->add_option("--format", format, "Override output.format")->check(CLI::IsMember({"csv", "json"}));
        registered.emplace_back(cmd, &sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? 0 : exit_validation;
    }

    const Subcommand *chosen = nullptr;
    for (const auto &[cmd, sub] : registered) {
        if (cmd->parsed()) {
            chosen = sub;
        }
    }

    ParsedScenario parsed;
    try {
        std::string text = config_path.empty() ? std::string(chosen->default_doc) : read_file(config_path);
        parsed = parse_scenario(text);
        if (std::find(chosen->modes.begin(), chosen->modes.end(), parsed.scenario.mode) == chosen->modes.end()) {
            throw ScenarioError(ScenarioErrorKind::invalid_field, "mode",
                                "mode '" + std::string(to_string(parsed.scenario.mode)) +
                                    "' cannot be run by subcommand '" + chosen->name + "'");
        }
    } catch (const ScenarioError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_validation;
    } catch (const ramsec::Error &e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_validation;
    }

    Scenario &s = parsed.scenario;
    if (seed) {
        s.noise.seed = *seed;
    }
    if (out_dir) {
        s.output.dir = *out_dir;
    }
    if (format) {
        s.output.format = *format == "json" ? OutputFormat::json : OutputFormat::csv;
    }
    for (const auto &w : parsed.warnings) {
        std::cerr << "warning: " << w << "\n";
    }

    RunOutcome outcome = run_scenario(s);
    if (!outcome.message.empty()) {
        std::cerr << (outcome.exit_code == exit_ok ? "" : "error: ") << outcome.message << "\n";
    }
    for (const auto &f : outcome.files) {
        std::cout << f.string() << "\n";
    }
    return outcome.exit_code;
}
