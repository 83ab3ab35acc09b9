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

// Scenario files (schema/scenario.schema.json, version 1).
//
// Values are kept in file units: detunings in Hz (delta = 2π × value rad/s),
// angles in units of π, times in seconds. A parsed Scenario is fully
// resolved, i.e. every default has been filled in, and emit_scenario writes
// every field back so that parse(emit(s)) == s.

#ifndef RAMSEC_SCENARIO_HPP
#define RAMSEC_SCENARIO_HPP

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ramsec/expsim.hpp"
#include "ramsec/protocol.hpp"

namespace ramsec::harness {

using nlohmann::json;

inline constexpr int schema_version = 1;

enum class Mode { normal, scrambled, retrieved, sdbv, ambiguity_sweep, optimize, secure_choice, fit };
enum class OutputFormat { csv, json };

inline constexpr std::pair<Mode, std::string_view> mode_names[] = {
    {Mode::normal, "normal"},
    {Mode::scrambled, "scrambled"},
    {Mode::retrieved, "retrieved"},
    {Mode::sdbv, "sdbv"},
    {Mode::ambiguity_sweep, "ambiguity-sweep"},
    {Mode::optimize, "optimize"},
    {Mode::secure_choice, "secure-choice"},
    {Mode::fit, "fit"},
};

inline std::string_view to_string(Mode mode) {
    for (const auto &[m, name] : mode_names) {
        if (m == mode) {
            return name;
        }
    }
    return "unknown";
}

inline std::optional<Mode> parse_mode(std::string_view text) {
    for (const auto &[m, name] : mode_names) {
        if (name == text) {
            return m;
        }
    }
    return std::nullopt;
}

enum class ScenarioErrorKind { malformed_input, unknown_mode, missing_field, invalid_field };

inline std::string_view to_string(ScenarioErrorKind kind) {
    switch (kind) {
        case ScenarioErrorKind::malformed_input:
            return "malformed-input";
        case ScenarioErrorKind::unknown_mode:
            return "unknown-mode";
        case ScenarioErrorKind::missing_field:
            return "missing-field";
        case ScenarioErrorKind::invalid_field:
            return "invalid-field";
    }
    return "unknown";
}

class ScenarioError : public std::runtime_error {
public:
    ScenarioError(ScenarioErrorKind kind, std::string field, std::string constraint)
        : std::runtime_error(std::string(to_string(kind)) + " [" + field + "]: " + constraint),
          kind_(kind),
          field_(std::move(field)),
          constraint_(std::move(constraint)) {
    }

    ScenarioErrorKind kind() const noexcept {
        return kind_;
    }
    const std::string &field() const noexcept {
        return field_;
    }
    const std::string &constraint() const noexcept {
        return constraint_;
    }

private:
    ScenarioErrorKind kind_;
    std::string field_;
    std::string constraint_;
};

struct FramesSpec {
    double delta_w_hz = 100.0;
    double delta_s_hz = 100.0;
    double phi_s_pi = 0.0;

    FrameSet resolve() const {
        return FrameSet(two_pi * delta_w_hz, two_pi * delta_s_hz, pi * phi_s_pi);
    }
    friend bool operator==(const FramesSpec &, const FramesSpec &) = default;
};

struct TimingSpec {
    double t1_s = 5e-3;
    double t2_s = 5e-3;
    double t3_s = 0.0;
    friend bool operator==(const TimingSpec &, const TimingSpec &) = default;
};

struct PulsesSpec {
    double write_area_pi = 0.5;
    double scramble_area_pi = 1.0;
    double read_area_pi = 0.5;
    friend bool operator==(const PulsesSpec &, const PulsesSpec &) = default;
};

struct GridSpec {
    double t_start_s = 0.0;
    double t_stop_s = 0.02;
    std::uint64_t t_points = 201;
    std::uint64_t phi_samples = 256;

    std::vector<double> T() const {
        return linear_grid(t_start_s, t_stop_s, static_cast<size_t>(t_points));
    }
    friend bool operator==(const GridSpec &, const GridSpec &) = default;
};

/// Named states g, e, plus = +x, minus = -x, or "custom" with explicit
/// components.
struct RecordedSpec {
    std::string label = "plus";
    BlochVector state{1.0, 0.0, 0.0};
    friend bool operator==(const RecordedSpec &, const RecordedSpec &) = default;
};

struct SweepSpec {
    double theta_start_pi = 0.0;
    double theta_stop_pi = 2.0;
    std::uint64_t theta_points = 41;
    friend bool operator==(const SweepSpec &, const SweepSpec &) = default;
};

struct OptimizerSpec {
    double tolerance = 1e-6;
    std::uint64_t scan_points = 361;
    friend bool operator==(const OptimizerSpec &, const OptimizerSpec &) = default;
};

struct NoiseSpec {
    std::optional<std::uint64_t> atom_count;
    std::optional<double> contrast_decay_tau_s;  // nullopt: no decay
    double phase_jitter_sigma = 0.0;
    std::uint64_t seed = 0;

    NoiseModel resolve() const {
        NoiseModel m;
        m.atom_count = atom_count;
        m.contrast_decay_tau = contrast_decay_tau_s.value_or(std::numeric_limits<double>::infinity());
        m.phase_jitter_sigma = phase_jitter_sigma;
        m.seed = seed;
        return m;
    }
    friend bool operator==(const NoiseSpec &, const NoiseSpec &) = default;
};

struct FitSpec {
    std::string flop = "normal";  // normal | scrambled | retrieved
    bool redraw_phi = true;
    friend bool operator==(const FitSpec &, const FitSpec &) = default;
};

struct OutputSpec {
    std::string dir = ".";
    OutputFormat format = OutputFormat::csv;
    friend bool operator==(const OutputSpec &, const OutputSpec &) = default;
};

struct Scenario {
    std::string name;
    Mode mode = Mode::normal;
    FramesSpec frames;
    TimingSpec timing;
    PulsesSpec pulses;
    GridSpec grid;
    RecordedSpec recorded;
    SweepSpec sweep;
    double wait_phase_pi = 0.5;
    Choice choice = Choice::yes;
    OptimizerSpec optimizer;
    NoiseSpec noise;
    std::uint64_t trials = 5;
    FitSpec fit;
    OutputSpec output;

    ProtocolConfig protocol() const {
        ProtocolConfig c;
        c.frames = frames.resolve();
        c.T1 = timing.t1_s;
        c.T2 = timing.t2_s;
        c.T3 = timing.t3_s;
        c.write_area = pi * pulses.write_area_pi;
        c.scramble_area = pi * pulses.scramble_area_pi;
        c.read_area = pi * pulses.read_area_pi;
        return c;
    }

    friend bool operator==(const Scenario &, const Scenario &) = default;
};

struct ParsedScenario {
    Scenario scenario;
    std::vector<std::string> warnings;
};

// ---------------------------------------------------------------------------

namespace detail {

class Reader {
public:
    Reader(const json &object, std::string path) : object_(object), path_(std::move(path)) {
        if (!object_.is_object()) {
            throw ScenarioError(ScenarioErrorKind::invalid_field, path_.empty() ? "<root>" : path_,
                                "must be an object");
        }
    }

    std::string field(std::string_view key) const {
        return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
    }

    bool has(std::string_view key) const {
        seen_.insert(std::string(key));
        return object_.contains(key) && !object_.at(std::string(key)).is_null();
    }
    bool present(std::string_view key) const {
        seen_.insert(std::string(key));
        return object_.contains(key);
    }
    const json &at(std::string_view key) const {
        return object_.at(std::string(key));
    }

    double number(std::string_view key, double fallback) const {
        if (!has(key)) {
            return fallback;
        }
        const json &v = at(key);
        if (!v.is_number()) {
            throw ScenarioError(ScenarioErrorKind::invalid_field, field(key), "must be a number");
        }
        double d = v.get<double>();
        if (!std::isfinite(d)) {
            throw ScenarioError(ScenarioErrorKind::invalid_field, field(key), "must be finite");
        }
        return d;
    }

    std::uint64_t count(std::string_view key, std::uint64_t fallback) const {
        if (!has(key)) {
            return fallback;
        }
        const json &v = at(key);
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
            throw ScenarioError(ScenarioErrorKind::invalid_field, field(key), "must be a non-negative integer");
        }
        return v.get<std::uint64_t>();
    }

    std::string text(std::string_view key, std::string fallback) const {
        if (!has(key)) {
            return fallback;
        }
        const json &v = at(key);
        if (!v.is_string()) {
            throw ScenarioError(ScenarioErrorKind::invalid_field, field(key), "must be a string");
        }
        return v.get<std::string>();
    }

    bool boolean(std::string_view key, bool fallback) const {
        if (!has(key)) {
            return fallback;
        }
        const json &v = at(key);
        if (!v.is_boolean()) {
            throw ScenarioError(ScenarioErrorKind::invalid_field, field(key), "must be a boolean");
        }
        return v.get<bool>();
    }

    std::optional<Reader> child(std::string_view key) const {
        if (!has(key)) {
            return std::nullopt;
        }
        return Reader(at(key), field(key));
    }

    /// Rejects keys that were never asked for.
    void finish() const {
        for (const auto &[key, value] : object_.items()) {
            if (!seen_.count(key)) {
                throw ScenarioError(ScenarioErrorKind::invalid_field, field(key), "unknown key");
            }
        }
    }

private:
    const json &object_;
    std::string path_;
    mutable std::set<std::string> seen_;
};

inline void require(bool ok, const std::string &field, const std::string &constraint) {
    if (!ok) {
        throw ScenarioError(ScenarioErrorKind::invalid_field, field, constraint);
    }
}

inline RecordedSpec parse_recorded(const Reader &root) {
    const json &v = root.at("recorded");
    RecordedSpec r;
    if (v.is_string()) {
        r.label = v.get<std::string>();
        if (r.label == "g") {
            r.state = BlochVector::ground();
        } else if (r.label == "e") {
            r.state = BlochVector::excited();
        } else if (r.label == "plus") {
            r.state = {1.0, 0.0, 0.0};
        } else if (r.label == "minus") {
            r.state = {-1.0, 0.0, 0.0};
        } else {
            throw ScenarioError(ScenarioErrorKind::invalid_field, "recorded",
                                "must be one of g, e, plus, minus or an {x, y, z} object");
        }
        return r;
    }
    Reader obj(v, "recorded");
    r.label = "custom";
    for (const char *key : {"x", "y", "z"}) {
        if (!obj.has(key)) {
            throw ScenarioError(ScenarioErrorKind::missing_field, obj.field(key), "custom state needs x, y and z");
        }
    }
    r.state = {obj.number("x", 0.0), obj.number("y", 0.0), obj.number("z", 0.0)};
    obj.finish();
    require(std::abs(r.state.norm() - 1.0) <= 1e-9, "recorded", "state must lie on the unit sphere");
    return r;
}

}  // namespace detail

/// Parses and validates a scenario document. Throws ScenarioError.
inline ParsedScenario parse_scenario(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error &e) {
        throw ScenarioError(ScenarioErrorKind::malformed_input, "<document>", e.what());
    }
    if (!doc.is_object()) {
        throw ScenarioError(ScenarioErrorKind::malformed_input, "<document>", "top level must be a JSON object");
    }
    using detail::require;
    detail::Reader root(doc, "");
    ParsedScenario out;
    Scenario &s = out.scenario;

    auto version = root.count("schema_version", schema_version);
    require(version == schema_version, "schema_version", "only version 1 is supported");

    if (!root.has("mode")) {
        throw ScenarioError(ScenarioErrorKind::missing_field, "mode", "required");
    }
    if (!root.at("mode").is_string()) {
        throw ScenarioError(ScenarioErrorKind::invalid_field, "mode", "must be a string");
    }
    auto mode = parse_mode(root.at("mode").get<std::string>());
    if (!mode) {
        throw ScenarioError(ScenarioErrorKind::unknown_mode, "mode", "unknown mode '" + root.at("mode").get<std::string>() + "'");
    }
    s.mode = *mode;
    s.name = root.text("name", std::string(to_string(s.mode)));
    require(!s.name.empty() && s.name.find_first_of("/\\") == std::string::npos, "name",
            "must be a non-empty file stem");

    if (auto f = root.child("frames")) {
        s.frames.delta_w_hz = f->number("delta_w_hz", s.frames.delta_w_hz);
        s.frames.delta_s_hz = f->number("delta_s_hz", s.frames.delta_s_hz);
        s.frames.phi_s_pi = f->number("phi_s_pi", s.frames.phi_s_pi);
        f->finish();
    }
    require(s.frames.delta_w_hz != 0.0, "frames.delta_w_hz", "must be non-zero");

    // Defaults that depend on the frames.
    const FrameSet frames = s.frames.resolve();
    const bool secure = s.mode == Mode::secure_choice;
    if (s.frames.delta_s_hz > 0.0) {
        s.timing.t2_s = retrieve_delay(frames.delta_s, 0);
    }
    s.grid.t_stop_s = 2.0 / std::abs(s.frames.delta_w_hz);

    bool t3_given = false;
    if (auto t = root.child("timing")) {
        s.timing.t1_s = t->number("t1_s", s.timing.t1_s);
        s.timing.t2_s = t->number("t2_s", s.timing.t2_s);
        t3_given = t->has("t3_s");
        s.timing.t3_s = t->number("t3_s", s.timing.t3_s);
        t->finish();
    }
    require(s.timing.t1_s >= 0.0, "timing.t1_s", "must be >= 0");
    require(s.timing.t2_s >= 0.0, "timing.t2_s", "must be >= 0");
    require(s.timing.t3_s >= 0.0, "timing.t3_s", "must be >= 0");
    if (secure && !t3_given) {
        require(frames.delta_w > 0.0, "frames.delta_w_hz", "secure-choice needs a positive WRI detuning");
        s.timing.t3_s = secure_read_delay(frames, s.timing.t1_s, s.timing.t2_s).T3;
    }

    if (auto p = root.child("pulses")) {
        s.pulses.write_area_pi = p->number("write_area_pi", s.pulses.write_area_pi);
        s.pulses.scramble_area_pi = p->number("scramble_area_pi", s.pulses.scramble_area_pi);
        s.pulses.read_area_pi = p->number("read_area_pi", s.pulses.read_area_pi);
        p->finish();
    }

    if (auto g = root.child("grid")) {
        s.grid.t_start_s = g->number("t_start_s", s.grid.t_start_s);
        s.grid.t_stop_s = g->number("t_stop_s", s.grid.t_stop_s);
        s.grid.t_points = g->count("t_points", s.grid.t_points);
        s.grid.phi_samples = g->count("phi_samples", s.grid.phi_samples);
        g->finish();
    }
    require(s.grid.t_points >= 1, "grid.t_points", "interval grid must have at least one point");
    require(s.grid.t_points <= 1000000, "grid.t_points", "must be <= 1000000");
    require(s.grid.t_start_s >= 0.0, "grid.t_start_s", "must be >= 0");
    require(s.grid.t_stop_s >= s.grid.t_start_s, "grid.t_stop_s", "must be >= t_start_s");
    require(s.grid.phi_samples >= 1 && s.grid.phi_samples <= 1000000, "grid.phi_samples", "must be in [1, 1000000]");

    const bool needs_recorded = s.mode == Mode::sdbv || s.mode == Mode::ambiguity_sweep || s.mode == Mode::optimize;
    if (root.has("recorded")) {
        s.recorded = detail::parse_recorded(root);
    } else if (needs_recorded) {
        throw ScenarioError(ScenarioErrorKind::missing_field, "recorded", "required for mode " + std::string(to_string(s.mode)));
    }

    if (auto w = root.child("sweep")) {
        s.sweep.theta_start_pi = w->number("theta_start_pi", s.sweep.theta_start_pi);
        s.sweep.theta_stop_pi = w->number("theta_stop_pi", s.sweep.theta_stop_pi);
        s.sweep.theta_points = w->count("theta_points", s.sweep.theta_points);
        w->finish();
    }
    require(s.sweep.theta_points >= 1 && s.sweep.theta_points <= 100000, "sweep.theta_points", "must be in [1, 100000]");

    s.wait_phase_pi = root.number("wait_phase_pi", s.wait_phase_pi);

    if (root.has("choice")) {
        auto c = root.text("choice", "yes");
        require(c == "yes" || c == "no", "choice", "must be yes or no");
        s.choice = c == "yes" ? Choice::yes : Choice::no;
    } else if (secure) {
        throw ScenarioError(ScenarioErrorKind::missing_field, "choice", "required for mode secure-choice");
    }

    if (auto o = root.child("optimizer")) {
        s.optimizer.tolerance = o->number("tolerance", s.optimizer.tolerance);
        s.optimizer.scan_points = o->count("scan_points", s.optimizer.scan_points);
        o->finish();
    }
    require(s.optimizer.tolerance > 0.0, "optimizer.tolerance", "must be > 0");
    require(s.optimizer.scan_points >= 181, "optimizer.scan_points", "must be >= 181");

    if (auto n = root.child("noise")) {
        if (n->has("atom_count")) {
            auto count = n->count("atom_count", 0);
            require(count >= 1, "noise.atom_count", "must be >= 1 (null for exact readout)");
            s.noise.atom_count = count;
        } else {
            n->present("atom_count");
        }
        if (n->has("contrast_decay_tau_s")) {
            double tau = n->number("contrast_decay_tau_s", 0.0);
            require(tau > 0.0, "noise.contrast_decay_tau_s", "must be > 0 (null for no decay)");
            s.noise.contrast_decay_tau_s = tau;
        } else {
            n->present("contrast_decay_tau_s");
        }
        s.noise.phase_jitter_sigma = n->number("phase_jitter_sigma", s.noise.phase_jitter_sigma);
        require(s.noise.phase_jitter_sigma >= 0.0, "noise.phase_jitter_sigma", "must be >= 0");
        s.noise.seed = n->count("seed", s.noise.seed);
        n->finish();
    }

    s.trials = root.count("trials", s.trials);
    require(s.trials >= 1 && s.trials <= 1000000, "trials", "must be in [1, 1000000]");

    if (auto f = root.child("fit")) {
        s.fit.flop = f->text("flop", s.fit.flop);
        s.fit.redraw_phi = f->boolean("redraw_phi", s.fit.redraw_phi);
        f->finish();
    }
    require(s.fit.flop == "normal" || s.fit.flop == "scrambled" || s.fit.flop == "retrieved", "fit.flop",
            "must be normal, scrambled or retrieved");

    if (auto o = root.child("output")) {
        s.output.dir = o->text("dir", s.output.dir);
        auto format = o->text("format", "csv");
        require(format == "csv" || format == "json", "output.format", "must be csv or json");
        s.output.format = format == "csv" ? OutputFormat::csv : OutputFormat::json;
        o->finish();
    }

    root.finish();

    if (s.mode == Mode::retrieved || (s.mode == Mode::fit && s.fit.flop == "retrieved")) {
        double sri_phase = frames.delta_s * s.timing.t2_s;
        if (wrap_distance(sri_phase - pi) > timing_tolerance * std::max(1.0, std::abs(sri_phase))) {
            out.warnings.push_back("timing.t2_s: SRI phase over T2 is not an odd multiple of π; "
                                   "the retrieve pulse will not descramble");
        }
    }
    return out;
}

inline json emit_scenario_json(const Scenario &s) {
    json j;
    j["schema_version"] = schema_version;
    j["name"] = s.name;
    j["mode"] = std::string(to_string(s.mode));
    j["frames"] = {{"delta_w_hz", s.frames.delta_w_hz}, {"delta_s_hz", s.frames.delta_s_hz}, {"phi_s_pi", s.frames.phi_s_pi}};
    j["timing"] = {{"t1_s", s.timing.t1_s}, {"t2_s", s.timing.t2_s}, {"t3_s", s.timing.t3_s}};
    j["pulses"] = {{"write_area_pi", s.pulses.write_area_pi},
                   {"scramble_area_pi", s.pulses.scramble_area_pi},
                   {"read_area_pi", s.pulses.read_area_pi}};
    j["grid"] = {{"t_start_s", s.grid.t_start_s},
                 {"t_stop_s", s.grid.t_stop_s},
                 {"t_points", s.grid.t_points},
                 {"phi_samples", s.grid.phi_samples}};
    if (s.recorded.label == "custom") {
        j["recorded"] = {{"x", s.recorded.state.x}, {"y", s.recorded.state.y}, {"z", s.recorded.state.z}};
    } else {
        j["recorded"] = s.recorded.label;
    }
    j["sweep"] = {{"theta_start_pi", s.sweep.theta_start_pi},
                  {"theta_stop_pi", s.sweep.theta_stop_pi},
                  {"theta_points", s.sweep.theta_points}};
    j["wait_phase_pi"] = s.wait_phase_pi;
    j["choice"] = std::string(to_string(s.choice));
    j["optimizer"] = {{"tolerance", s.optimizer.tolerance}, {"scan_points", s.optimizer.scan_points}};
    j["noise"] = {{"atom_count", s.noise.atom_count ? json(*s.noise.atom_count) : json(nullptr)},
                  {"contrast_decay_tau_s",
                   s.noise.contrast_decay_tau_s ? json(*s.noise.contrast_decay_tau_s) : json(nullptr)},
                  {"phase_jitter_sigma", s.noise.phase_jitter_sigma},
                  {"seed", s.noise.seed}};
    j["trials"] = s.trials;
    j["fit"] = {{"flop", s.fit.flop}, {"redraw_phi", s.fit.redraw_phi}};
    j["output"] = {{"dir", s.output.dir}, {"format", s.output.format == OutputFormat::csv ? "csv" : "json"}};
    return j;
}

inline std::string emit_scenario(const Scenario &s) {
    return emit_scenario_json(s).dump(2) + "\n";
}

}  // namespace ramsec::harness

#endif
