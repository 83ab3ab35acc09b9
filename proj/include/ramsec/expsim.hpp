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

// Experiment emulation: repeated noisy shots of a Ramsey flop.
//
// One shot at interval T:
//   1. phi_S is redrawn uniformly on [0, 2π) if the protocol asks for it,
//   2. a Gaussian WRI phase offset (sigma = phase_jitter_sigma) is added to
//      the last free-precession interval,
//   3. the ideal P_e is damped toward 0.5 with exp(-t / tau), t being the
//      total free-evolution time of the shot,
//   4. the ensemble readout is a binomial draw over atom_count atoms.
// Steps whose knob is off consume no random numbers. Trial i draws from
// RandomStream(seed, i), so trials are independent of evaluation order.

#ifndef RAMSEC_EXPSIM_HPP
#define RAMSEC_EXPSIM_HPP

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "ramsec/analysis.hpp"
#include "ramsec/random.hpp"

namespace ramsec {

struct NoiseModel {
    std::optional<std::uint64_t> atom_count;  // nullopt: exact readout
    double contrast_decay_tau = std::numeric_limits<double>::infinity();
    double phase_jitter_sigma = 0.0;
    std::uint64_t seed = 0;

    static NoiseModel exact(std::uint64_t seed = 0) {
        NoiseModel m;
        m.seed = seed;
        return m;
    }

    void validate() const {
        if (atom_count && *atom_count == 0) {
            throw Error(ErrorKind::invalid_argument, "atom_count must be >= 1");
        }
        if (!(contrast_decay_tau > 0.0)) {
            throw Error(ErrorKind::invalid_argument, "contrast_decay_tau must be positive or infinite");
        }
        if (!(phase_jitter_sigma >= 0.0) || !std::isfinite(phase_jitter_sigma)) {
            throw Error(ErrorKind::invalid_argument, "phase_jitter_sigma must be finite and >= 0");
        }
    }

    friend bool operator==(const NoiseModel &, const NoiseModel &) = default;
};

/// Single-shot ensemble readout: excited-atom count over `atom_count`.
inline double project_noise(double p_true, std::optional<std::uint64_t> atom_count, RandomStream &rng) {
    if (!std::isfinite(p_true) || p_true < 0.0 || p_true > 1.0) {
        throw Error(ErrorKind::invalid_argument, "probability must lie in [0, 1]");
    }
    if (!atom_count) {
        return p_true;
    }
    if (*atom_count == 0) {
        throw Error(ErrorKind::invalid_argument, "atom_count must be >= 1");
    }
    return static_cast<double>(rng.binomial(*atom_count, p_true)) / static_cast<double>(*atom_count);
}

inline double damp_contrast(double p, double t, double tau) {
    if (!(tau > 0.0)) {
        throw Error(ErrorKind::invalid_argument, "tau must be positive or infinite");
    }
    if (std::isinf(tau)) {
        return p;
    }
    return 0.5 + (p - 0.5) * std::exp(-t / tau);
}

/// P'(T) = 0.5 + (P(T) - 0.5) exp(-T / tau).
inline FlopCurve damp_contrast(const FlopCurve &curve, double tau) {
    FlopCurve out = curve;
    for (size_t i = 0; i < out.p_e.size(); ++i) {
        out.p_e[i] = damp_contrast(curve.p_e[i], curve.T[i], tau);
    }
    return out;
}

enum class FlopKind { normal, scrambled, retrieved };

/// Which Ramsey flop a trial run measures.
struct FlopProtocol {
    FlopKind kind = FlopKind::normal;
    FrameSet frames;
    double theta_s = pi;
    double T1 = 5e-3;
    double T2 = 5e-3;
    bool redraw_phi = false;

    Timeline timeline(double T) const {
        switch (kind) {
            case FlopKind::normal:
                return normal_sequence(T);
            case FlopKind::scrambled:
                return scrambled_sequence(theta_s, T1, T);
            case FlopKind::retrieved:
                return retrieved_sequence(theta_s, T1, T2, T);
        }
        return {};
    }
};

struct TrialStats {
    std::vector<double> T;
    std::vector<double> mean;
    std::vector<double> std;  // sample standard deviation (k - 1)
    std::vector<double> min;
    std::vector<double> max;
    size_t k = 0;
    std::vector<std::vector<double>> samples;  // [trial][T index]
};

inline TrialStats run_trials(const FlopProtocol &protocol, const NoiseModel &noise, size_t k_trials,
                             std::span<const double> T_grid) {
    noise.validate();
    validate_T_grid(T_grid);
    if (k_trials == 0) {
        throw Error(ErrorKind::invalid_argument, "need at least one trial");
    }
    const size_t m = T_grid.size();
    TrialStats stats;
    stats.T.assign(T_grid.begin(), T_grid.end());
    stats.k = k_trials;
    stats.samples.assign(k_trials, std::vector<double>(m));

    for (size_t trial = 0; trial < k_trials; ++trial) {
        RandomStream rng(noise.seed, trial);
        for (size_t j = 0; j < m; ++j) {
            FrameSet frames = protocol.frames;
            if (protocol.redraw_phi) {
                frames = frames.with_phase(two_pi * rng.uniform());
            }
            SimulationOptions options;
            if (noise.phase_jitter_sigma > 0.0) {
                options.final_wait_phase_offset = noise.phase_jitter_sigma * rng.normal();
            }
            Timeline timeline = protocol.timeline(T_grid[j]);
            double p = excitation_probability(simulate(timeline, frames, BlochVector::ground(), options));
            p = damp_contrast(p, timeline.total_duration(), noise.contrast_decay_tau);
            stats.samples[trial][j] = project_noise(p, noise.atom_count, rng);
        }
    }

    stats.mean.resize(m);
    stats.std.resize(m);
    stats.min.resize(m);
    stats.max.resize(m);
    const double k = static_cast<double>(k_trials);
    for (size_t j = 0; j < m; ++j) {
        // Shifted by the first sample so identical trials give std exactly 0.
        const double shift = stats.samples[0][j];
        double sum = 0.0;
        double lo = 1.0;
        double hi = 0.0;
        for (size_t trial = 0; trial < k_trials; ++trial) {
            double v = stats.samples[trial][j];
            sum += v - shift;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        double offset = sum / k;
        double mean = shift + offset;
        double ss = 0.0;
        for (size_t trial = 0; trial < k_trials; ++trial) {
            double d = stats.samples[trial][j] - shift - offset;
            ss += d * d;
        }
        stats.mean[j] = mean;
        stats.std[j] = k_trials > 1 ? std::sqrt(ss / (k - 1.0)) : 0.0;
        stats.min[j] = lo;
        stats.max[j] = hi;
    }
    return stats;
}

}  // namespace ramsec

#endif
