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

// Write - scramble - retrieve - read protocols and the secure two-value
// record.
//
// A yes/no choice is written as a π/2 or 3π/2 pulse on |g>, scrambled by an
// SRI π pulse, descrambled by a second SRI π pulse once the SRI has
// precessed by an odd multiple of π, and read with a π/2 pulse once the WRI
// has accumulated a multiple of 2π. Ideal readout is P_e = 1 for yes and 0
// for no, whatever phi_S was.

#ifndef RAMSEC_PROTOCOL_HPP
#define RAMSEC_PROTOCOL_HPP

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>

#include "ramsec/analysis.hpp"

namespace ramsec {

enum class Choice { yes, no };

inline std::string_view to_string(Choice c) {
    return c == Choice::yes ? "yes" : "no";
}

struct ProtocolConfig {
    FrameSet frames;
    double T1 = 5e-3;  // write -> scramble
    double T2 = 5e-3;  // scramble -> retrieve
    double T3 = 0.0;   // retrieve -> read
    double write_area = half_pi;
    double scramble_area = pi;
    double read_area = half_pi;

    void validate() const {
        for (double t : {T1, T2, T3}) {
            if (!std::isfinite(t) || t < 0.0) {
                throw Error(ErrorKind::invalid_argument, "protocol intervals must be finite and >= 0");
            }
        }
        for (double a : {write_area, scramble_area, read_area}) {
            require_finite(a, "pulse area");
        }
    }

    friend bool operator==(const ProtocolConfig &, const ProtocolConfig &) = default;
};

/// Timeline for `config`; the retrieve pulse and the T2 wait before it are
/// only emitted when `with_retrieve` is set (otherwise T2 + T3 are merged).
inline Timeline protocol_timeline(const ProtocolConfig &config, bool with_retrieve = true) {
    config.validate();
    Timeline t;
    t.pulse(Frame::wri, config.write_area).wait(config.T1).pulse(Frame::sri, config.scramble_area);
    if (with_retrieve) {
        t.wait(config.T2).pulse(Frame::sri, config.scramble_area).wait(config.T3);
    } else {
        t.wait(config.T2 + config.T3);
    }
    t.pulse(Frame::wri, config.read_area);
    t.durations = PulseDurations{};
    return t;
}

/// Scramble-to-retrieve delay giving (2m+1)π of SRI phase.
inline double retrieve_delay(double delta_s, long m) {
    if (!(delta_s > 0.0) || !std::isfinite(delta_s)) {
        throw Error(ErrorKind::invalid_argument, "delta_S must be positive");
    }
    if (m < 0) {
        throw Error(ErrorKind::invalid_argument, "m must be >= 0");
    }
    return static_cast<double>(2 * m + 1) * pi / delta_s;
}

/// Write-to-read delay giving (2n+1)π of WRI phase, for which a
/// matching read pulse returns the ensemble to |g>.
inline double faithful_read_delay(double delta_w, long n) {
    if (!(delta_w > 0.0) || !std::isfinite(delta_w)) {
        throw Error(ErrorKind::invalid_argument, "delta_W must be positive");
    }
    if (n < 0) {
        throw Error(ErrorKind::invalid_argument, "n must be >= 0");
    }
    return static_cast<double>(2 * n + 1) * pi / delta_w;
}

struct ReadDelay {
    double T3 = 0.0;
    long k = 0;
};

/// Smallest T3 >= 0 with delta_W (T1 + T2 + T3) = 2kπ. Without `k` the
/// smallest feasible k is used.
inline ReadDelay secure_read_delay(const FrameSet &frames, double T1, double T2, std::optional<long> k = {}) {
    if (!(frames.delta_w > 0.0) || !std::isfinite(frames.delta_w)) {
        throw Error(ErrorKind::invalid_argument, "delta_W must be positive");
    }
    if (!std::isfinite(T1) || !std::isfinite(T2) || T1 < 0.0 || T2 < 0.0) {
        throw Error(ErrorKind::invalid_argument, "T1 and T2 must be finite and >= 0");
    }
    const double elapsed = T1 + T2;
    const double turns = frames.delta_w * elapsed / two_pi;
    constexpr double slack = 1e-12;
    long chosen = k ? *k : static_cast<long>(std::ceil(turns - slack * std::max(1.0, turns)));
    if (static_cast<double>(chosen) < turns - slack * std::max(1.0, turns)) {
        throw Error(ErrorKind::infeasible_timing, "no T3 >= 0 reaches 2kπ of WRI phase for k = " +
                                                      std::to_string(chosen));
    }
    double T3 = two_pi * static_cast<double>(chosen) / frames.delta_w - elapsed;
    // Rounding residue when T1 + T2 already sits on a multiple of 2π.
    if (T3 < 0.0) {
        T3 = 0.0;
    }
    return {T3, chosen};
}

inline double encode_choice(Choice choice) {
    return choice == Choice::yes ? half_pi : 3.0 * half_pi;
}

inline constexpr double timing_tolerance = 1e-9;

namespace detail {

// |phase - target| modulo 2π, relative to the magnitude of `phase`.
inline bool phase_matches(double phase, double target) {
    return wrap_distance(phase - target) <= timing_tolerance * std::max(1.0, std::abs(phase));
}

inline void check_secure_config(const ProtocolConfig &config) {
    config.validate();
    const auto &f = config.frames;
    if (!phase_matches(config.scramble_area, pi)) {
        throw Error(ErrorKind::protocol_misconfiguration, "scramble area must be π");
    }
    if (!phase_matches(config.read_area, half_pi)) {
        throw Error(ErrorKind::protocol_misconfiguration, "read area must be π/2");
    }
    if (!phase_matches(f.delta_s * config.T2, pi)) {
        throw Error(ErrorKind::protocol_misconfiguration, "SRI phase over T2 is not an odd multiple of π");
    }
    if (!phase_matches(f.delta_w * (config.T1 + config.T2 + config.T3), 0.0)) {
        throw Error(ErrorKind::protocol_misconfiguration, "WRI phase over T1+T2+T3 is not a multiple of 2π");
    }
}

}  // namespace detail

/// Reference timings: T1 = T2 = 5 ms, T3 chosen by secure_read_delay.
inline ProtocolConfig reference_secure_config(const FrameSet &frames = FrameSet::reference()) {
    ProtocolConfig config;
    config.frames = frames;
    config.T1 = 5e-3;
    config.T2 = retrieve_delay(frames.delta_s, 0);
    config.T3 = secure_read_delay(frames, config.T1, config.T2).T3;
    return config;
}

/// Full write/scramble/retrieve/read run for `choice`; returns P_e.
inline double run_secure_choice(Choice choice, double phi_s, const ProtocolConfig &config) {
    detail::check_secure_config(config);
    ProtocolConfig c = config;
    c.write_area = encode_choice(choice);
    c.frames = config.frames.with_phase(phi_s);
    return excitation_probability(simulate(protocol_timeline(c), c.frames, BlochVector::ground()));
}

inline constexpr double decode_threshold = 0.5;

inline Choice decode_choice(double p_e, double threshold = decode_threshold) {
    if (!std::isfinite(p_e) || p_e < 0.0 || p_e > 1.0) {
        throw Error(ErrorKind::invalid_argument, "P_e must lie in [0, 1]");
    }
    if (p_e > threshold) {
        return Choice::yes;
    }
    if (p_e < threshold) {
        return Choice::no;
    }
    throw Error(ErrorKind::indeterminate, "P_e sits exactly on the decision threshold");
}

/// What an observer holding the scrambled memory can learn: the P_e samples
/// of the record read without the retrieve pulse (write, T1, scramble,
/// T2 + T3, read) over the phi_S grid, for yes and for no. Returns the largest
/// elementwise gap between the two sorted sample sets. The yes and no sets are
/// a quarter turn of phi_S apart, so n_phi must be a multiple of 4.
inline double secrecy_check(const ProtocolConfig &config, size_t n_phi) {
    if (n_phi < 16 || n_phi % 4 != 0) {
        throw Error(ErrorKind::invalid_argument, "secrecy check needs n_phi >= 16 and a multiple of 4");
    }
    config.validate();
    auto samples = [&](Choice choice) {
        ProtocolConfig c = config;
        c.write_area = encode_choice(choice);
        std::vector<double> p;
        p.reserve(n_phi);
        for (double phi : phi_grid(n_phi)) {
            c.frames = config.frames.with_phase(phi);
            p.push_back(excitation_probability(simulate(protocol_timeline(c, false), c.frames, BlochVector::ground())));
        }
        std::sort(p.begin(), p.end());
        return p;
    };
    auto yes = samples(Choice::yes);
    auto no = samples(Choice::no);
    double gap = 0.0;
    for (size_t i = 0; i < n_phi; ++i) {
        gap = std::max(gap, std::abs(yes[i] - no[i]));
    }
    return gap;
}

}  // namespace ramsec

#endif
