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

// Scenario execution and output files.
//
// Output for a scenario named NAME in directory DIR:
//   csv  format: DIR/NAME.csv (plus DIR/NAME.projection.csv for sdbv) and
//                DIR/NAME.report.json
//   json format: DIR/NAME.json only
// Every report embeds the resolved scenario under "config". CSV columns:
//   normal / scrambled / retrieved  T_seconds,T_normalized,phi_S,P_e
//   sdbv                            phi_S,x,y,z
//   sdbv projection                 phi_S,x,z
//   ambiguity-sweep                 theta_S,A,A_sampled
//   optimize                        theta_S,A
//   secure-choice                   choice,phi_S,P_e,decoded
//   fit                             T_seconds,T_normalized,mean,std
// T_normalized is T / (2π / delta_W). Angles in CSV files are in radians.
// Numbers are written with 17 significant digits.

#ifndef RAMSEC_RUN_HPP
#define RAMSEC_RUN_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ramsec/fit.hpp"
#include "ramsec/scenario.hpp"

namespace ramsec::harness {

enum ExitCode : int { exit_ok = 0, exit_validation = 2, exit_runtime = 3, exit_not_converged = 4 };

struct RunOutcome {
    int exit_code = exit_ok;
    std::vector<std::filesystem::path> files;
    std::string message;
};

inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline json number_or_null(double v) {
    return std::isfinite(v) ? json(v) : json(nullptr);
}

namespace detail {

class Table {
public:
    explicit Table(std::string header) : text_(std::move(header) + "\n") {
    }

    template <typename... Cells>
    void row(const Cells &...cells) {
        bool first = true;
        ((text_ += (first ? "" : ","), text_ += cell(cells), first = false), ...);
        text_ += "\n";
    }

    const std::string &text() const {
        return text_;
    }

private:
    static std::string cell(double v) {
        return format_number(v);
    }
    static std::string cell(const std::string &s) {
        return s;
    }
    static std::string cell(std::string_view s) {
        return std::string(s);
    }
    std::string text_;
};

// Writes through a temporary so readers never see a half-written file.
inline void write_atomically(const std::filesystem::path &path, const std::string &content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(ErrorKind::invalid_argument, "cannot open " + tmp.string() + " for writing");
        }
        out << content;
        if (!out.flush()) {
            throw Error(ErrorKind::invalid_argument, "failed writing " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

struct Emitted {
    json report;                                                // summary + config
    std::vector<std::pair<std::string, Table>> tables;          // suffix, table
    json data;                                                  // full data for json format
    int exit_code = exit_ok;
};

inline json curve_json(std::span<const double> T, double delta_w) {
    json t = json::array();
    json tn = json::array();
    for (double v : T) {
        t.push_back(v);
        tn.push_back(v * delta_w / two_pi);
    }
    return {{"T_seconds", t}, {"T_normalized", tn}};
}

inline Emitted run_flop(const Scenario &s) {
    Emitted e;
    FrameSet frames = s.frames.resolve();
    auto T = s.grid.T();
    double theta = pi * s.pulses.scramble_area_pi;
    Table table("T_seconds,T_normalized,phi_S,P_e");
    e.data = curve_json(T, frames.delta_w);
    if (s.mode == Mode::normal) {
        FlopCurve c = normal_flop(frames.delta_w, T);
        for (size_t j = 0; j < T.size(); ++j) {
            table.row(T[j], T[j] * frames.delta_w / two_pi, frames.phi_s, c.p_e[j]);
        }
        e.data["phi_S"] = json::array({frames.phi_s});
        e.data["P_e"] = json::array({c.p_e});
        e.report["max_spread"] = 0.0;
    } else {
        auto phi = phi_grid(static_cast<size_t>(s.grid.phi_samples));
        FlopFamily fam = s.mode == Mode::scrambled
                             ? scrambled_flop(theta, s.timing.t1_s, T, phi, frames)
                             : retrieved_flop(theta, s.timing.t1_s, s.timing.t2_s, T, phi, frames);
        double max_spread = 0.0;
        double min_spread = 1.0;
        for (size_t j = 0; j < T.size(); ++j) {
            max_spread = std::max(max_spread, fam.sampled_spread(j));
            min_spread = std::min(min_spread, fam.sampled_spread(j));
        }
        for (size_t i = 0; i < fam.phi.size(); ++i) {
            for (size_t j = 0; j < T.size(); ++j) {
                table.row(T[j], T[j] * frames.delta_w / two_pi, fam.phi[i], fam.p_e[i][j]);
            }
        }
        e.data["phi_S"] = fam.phi;
        e.data["P_e"] = fam.p_e;
        e.report["max_spread"] = max_spread;
        e.report["min_spread"] = min_spread;
    }
    e.tables.emplace_back("", std::move(table));
    return e;
}

inline Emitted run_sdbv(const Scenario &s) {
    Emitted e;
    size_t n = static_cast<size_t>(s.grid.phi_samples);
    double theta = pi * s.pulses.scramble_area_pi;
    Sdbv points = sdbv(s.recorded.state, theta, n);
    auto proj = sdbv_projection_xz(s.recorded.state, theta, pi * s.wait_phase_pi, n);
    Table t("phi_S,x,y,z");
    Table p("phi_S,x,z");
    json pts = json::array();
    json pj = json::array();
    double max_abs_z = 0.0;
    double z_lo = 1.0, z_hi = -1.0;
    for (size_t k = 0; k < n; ++k) {
        const auto &v = points.points[k];
        t.row(points.phi[k], v.x, v.y, v.z);
        p.row(proj[k].phi, proj[k].x, proj[k].z);
        pts.push_back({points.phi[k], v.x, v.y, v.z});
        pj.push_back({proj[k].phi, proj[k].x, proj[k].z});
        max_abs_z = std::max(max_abs_z, std::abs(v.z));
        z_lo = std::min(z_lo, proj[k].z);
        z_hi = std::max(z_hi, proj[k].z);
    }
    e.report["max_abs_z"] = max_abs_z;
    e.report["projection_z_extent"] = z_hi - z_lo;
    e.data["sdbv"] = pts;
    e.data["projection_xz"] = pj;
    e.tables.emplace_back("", std::move(t));
    e.tables.emplace_back(".projection", std::move(p));
    return e;
}

inline Emitted run_ambiguity_sweep(const Scenario &s) {
    Emitted e;
    FrameSet frames = s.frames.resolve();
    auto T = s.grid.T();
    auto thetas = linear_grid(pi * s.sweep.theta_start_pi, pi * s.sweep.theta_stop_pi,
                              static_cast<size_t>(s.sweep.theta_points));
    Table table("theta_S,A,A_sampled");
    json rows = json::array();
    for (double theta : thetas) {
        auto r = ambiguity_report(s.recorded.state, theta, T, static_cast<size_t>(s.grid.phi_samples), frames);
        table.row(theta, r.aggregate, r.sampled_aggregate);
        rows.push_back({{"theta_S", theta}, {"A", r.aggregate}, {"A_sampled", r.sampled_aggregate}, {"range", r.range}});
    }
    e.data = curve_json(T, frames.delta_w);
    e.data["sweep"] = rows;
    e.tables.emplace_back("", std::move(table));
    return e;
}

inline Emitted run_optimize(const Scenario &s) {
    Emitted e;
    FrameSet frames = s.frames.resolve();
    auto T = s.grid.T();
    OptimizerSettings settings;
    settings.scan_points = static_cast<size_t>(s.optimizer.scan_points);
    auto opt = optimize_scramble_area(s.recorded.state, T, static_cast<size_t>(s.grid.phi_samples), frames,
                                      s.optimizer.tolerance, settings);
    Table table("theta_S,A");
    for (size_t i = 0; i < opt.scan_theta.size(); ++i) {
        table.row(opt.scan_theta[i], opt.scan_ambiguity[i]);
    }
    e.report["theta_star"] = opt.theta;
    e.report["theta_star_pi"] = opt.theta / pi;
    e.report["ambiguity"] = opt.ambiguity;
    e.report["plateau"] = {opt.plateau_lo, opt.plateau_hi};
    e.data["scan_theta"] = opt.scan_theta;
    e.data["scan_ambiguity"] = opt.scan_ambiguity;
    e.tables.emplace_back("", std::move(table));
    return e;
}

inline Emitted run_secure(const Scenario &s) {
    Emitted e;
    ProtocolConfig config = s.protocol();
    double p = run_secure_choice(s.choice, config.frames.phi_s, config);
    Choice decoded = decode_choice(p);
    size_t n_phi = std::max<size_t>(16, (static_cast<size_t>(s.grid.phi_samples) + 3) / 4 * 4);
    double gap = secrecy_check(config, n_phi);
    Table table("choice,phi_S,P_e,decoded");
    table.row(to_string(s.choice), config.frames.phi_s, p, to_string(decoded));
    e.report["choice"] = std::string(to_string(s.choice));
    e.report["phi_S"] = config.frames.phi_s;
    e.report["P_e"] = p;
    e.report["decoded"] = std::string(to_string(decoded));
    e.report["secrecy_gap"] = gap;
    e.tables.emplace_back("", std::move(table));
    return e;
}

inline Emitted run_fit(const Scenario &s) {
    Emitted e;
    FrameSet frames = s.frames.resolve();
    auto T = s.grid.T();
    FlopProtocol protocol;
    protocol.frames = frames;
    protocol.kind = s.fit.flop == "normal" ? FlopKind::normal
                    : s.fit.flop == "scrambled" ? FlopKind::scrambled
                                                : FlopKind::retrieved;
    protocol.theta_s = pi * s.pulses.scramble_area_pi;
    protocol.T1 = s.timing.t1_s;
    protocol.T2 = s.timing.t2_s;
    protocol.redraw_phi = s.fit.redraw_phi && protocol.kind != FlopKind::normal;
    auto stats = run_trials(protocol, s.noise.resolve(), static_cast<size_t>(s.trials), T);
    auto fit = fit_damped_sinusoid(stats.T, stats.mean);

    Table table("T_seconds,T_normalized,mean,std");
    for (size_t j = 0; j < T.size(); ++j) {
        table.row(T[j], T[j] * frames.delta_w / two_pi, stats.mean[j], stats.std[j]);
    }
    e.report["fit"] = {{"offset", fit.params.offset},
                       {"amplitude", fit.params.amplitude},
                       {"tau_s", number_or_null(fit.params.tau)},
                       {"omega", fit.params.omega},
                       {"phase", fit.params.phase},
                       {"rms", fit.rms},
                       {"converged", fit.converged},
                       {"degenerate_amplitude", fit.degenerate_amplitude},
                       {"iterations", fit.iterations},
                       {"significance", number_or_null(fit.significance)},
                       {"significance_threshold", fit.significance_threshold}};
    e.data = curve_json(T, frames.delta_w);
    e.data["mean"] = stats.mean;
    e.data["std"] = stats.std;
    e.tables.emplace_back("", std::move(table));
    e.exit_code = fit.converged ? exit_ok : exit_not_converged;
    return e;
}

}  // namespace detail

/// Runs a validated scenario and writes its outputs.
inline RunOutcome run_scenario(const Scenario &s) {
    RunOutcome outcome;
    detail::Emitted e;
    try {
        switch (s.mode) {
            case Mode::normal:
            case Mode::scrambled:
            case Mode::retrieved:
                e = detail::run_flop(s);
                break;
            case Mode::sdbv:
                e = detail::run_sdbv(s);
                break;
            case Mode::ambiguity_sweep:
                e = detail::run_ambiguity_sweep(s);
                break;
            case Mode::optimize:
                e = detail::run_optimize(s);
                break;
            case Mode::secure_choice:
                e = detail::run_secure(s);
                break;
            case Mode::fit:
                e = detail::run_fit(s);
                break;
        }
    } catch (const Error &err) {
        outcome.exit_code = exit_runtime;
        outcome.message = "scenario '" + s.name + "' (" + std::string(to_string(s.mode)) + "): " + err.what();
        return outcome;
    }

    std::filesystem::path dir(s.output.dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        outcome.exit_code = exit_runtime;
        outcome.message = "cannot create output directory " + dir.string() + ": " + ec.message();
        return outcome;
    }

    json report;
    report["scenario"] = s.name;
    report["mode"] = std::string(to_string(s.mode));
    report["summary"] = e.report.is_null() ? json::object() : e.report;
    report["config"] = emit_scenario_json(s);
    try {
        if (s.output.format == OutputFormat::csv) {
            for (const auto &[suffix, table] : e.tables) {
                auto path = dir / (s.name + suffix + ".csv");
                detail::write_atomically(path, table.text());
                outcome.files.push_back(path);
            }
            auto path = dir / (s.name + ".report.json");
            detail::write_atomically(path, report.dump(2) + "\n");
            outcome.files.push_back(path);
        } else {
            report["data"] = e.data.is_null() ? json::object() : e.data;
            auto path = dir / (s.name + ".json");
            detail::write_atomically(path, report.dump(2) + "\n");
            outcome.files.push_back(path);
        }
    } catch (const std::exception &err) {
        outcome.exit_code = exit_runtime;
        outcome.message = std::string("writing outputs failed: ") + err.what();
        return outcome;
    }
    outcome.exit_code = e.exit_code;
    if (e.exit_code == exit_not_converged) {
        outcome.message = "fit did not converge";
    }
    return outcome;
}

}  // namespace ramsec::harness

#endif
