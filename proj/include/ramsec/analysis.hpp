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

// Ramsey flops, stochastic Bloch-vector distributions and phase ambiguity.
//
// The unknown WRI-SRI phase phi_S is sampled on the deterministic grid
// phi_k = 2πk/n. Excitation-probability ranges over phi_S are first taken on
// that grid and then polished by a golden-section search around the grid
// extremum, so a reported range is the range over the continuous phase and
// does not carry the O((π/n)^2) grid bias.

#ifndef RAMSEC_ANALYSIS_HPP
#define RAMSEC_ANALYSIS_HPP

#include <algorithm>
#include <span>
#include <vector>

#include "ramsec/golden_section.hpp"
#include "ramsec/sequence.hpp"

namespace ramsec {

inline constexpr double half_pi = pi / 2.0;

// ---------------------------------------------------------------------------
// Sequence builders. All start from |g> at t = 0 unless stated otherwise.

/// write(π/2) - T - read(π/2)
inline Timeline normal_sequence(double T) {
    return Timeline().pulse(Frame::wri, half_pi).wait(T).pulse(Frame::wri, half_pi);
}

/// write(π/2) - T1 - scramble(θ) - T - read(π/2)
inline Timeline scrambled_sequence(double theta_s, double T1, double T) {
    return Timeline()
        .pulse(Frame::wri, half_pi)
        .wait(T1)
        .pulse(Frame::sri, theta_s)
        .wait(T)
        .pulse(Frame::wri, half_pi);
}

/// write(π/2) - T1 - scramble(θ) - T2 - retrieve(θ) - T - read(π/2)
inline Timeline retrieved_sequence(double theta_s, double T1, double T2, double T) {
    return Timeline()
        .pulse(Frame::wri, half_pi)
        .wait(T1)
        .pulse(Frame::sri, theta_s)
        .wait(T2)
        .pulse(Frame::sri, theta_s)
        .wait(T)
        .pulse(Frame::wri, half_pi);
}

// ---------------------------------------------------------------------------

struct FlopCurve {
    std::vector<double> T;    // s
    std::vector<double> p_e;  // excitation probability at each T
};

/// Rows indexed by phi sample, columns by T.
struct FlopFamily {
    std::vector<double> T;
    std::vector<double> phi;
    std::vector<std::vector<double>> p_e;

    /// max over phi minus min over phi at column `j`, on the stored samples.
    double sampled_spread(size_t j) const {
        double lo = 1.0;
        double hi = 0.0;
        for (const auto &row : p_e) {
            lo = std::min(lo, row[j]);
            hi = std::max(hi, row[j]);
        }
        return hi - lo;
    }
};

struct Sdbv {
    BlochVector recorded;
    double theta_s = 0.0;
    std::vector<double> phi;
    std::vector<BlochVector> points;
};

struct ProjectedPoint {
    double phi = 0.0;
    double x = 0.0;
    double z = 0.0;
};

/// Extremes of a periodic function of phi_S.
struct PhaseRange {
    double sampled_min = 0.0;
    double sampled_max = 0.0;
    double min = 0.0;
    double max = 0.0;

    double width() const {
        return max - min;
    }
    double sampled_width() const {
        return sampled_max - sampled_min;
    }
};

struct AmbiguityReport {
    double theta_s = 0.0;
    std::vector<double> T;
    std::vector<double> range;          // r(T), continuous phi_S
    std::vector<double> sampled_range;  // r(T) on the phi grid only
    double aggregate = 0.0;             // A = min_T r(T)
    double sampled_aggregate = 0.0;
};

struct ScrambleOptimum {
    double theta = 0.0;
    double ambiguity = 0.0;
    // Scan points whose ambiguity is within plateau_tolerance of the best.
    double plateau_lo = 0.0;
    double plateau_hi = 0.0;
    std::vector<double> scan_theta;
    std::vector<double> scan_ambiguity;
};

// ---------------------------------------------------------------------------

inline std::vector<double> phi_grid(size_t n) {
    if (n == 0) {
        throw Error(ErrorKind::invalid_argument, "phi grid needs at least one sample");
    }
    std::vector<double> phi(n);
    for (size_t k = 0; k < n; ++k) {
        phi[k] = two_pi * static_cast<double>(k) / static_cast<double>(n);
    }
    return phi;
}

/// `points` values evenly spaced over [start, stop], both ends included.
inline std::vector<double> linear_grid(double start, double stop, size_t points) {
    std::vector<double> grid(points);
    for (size_t i = 0; i < points; ++i) {
        grid[i] = points == 1 ? start
                              : start + (stop - start) * static_cast<double>(i) / static_cast<double>(points - 1);
    }
    return grid;
}

/// 201 points over two flop periods, [0, 2 * 2π/delta_W].
inline std::vector<double> default_T_grid(double delta_w) {
    return linear_grid(0.0, 2.0 * two_pi / std::abs(delta_w), 201);
}

inline void validate_T_grid(std::span<const double> T) {
    if (T.empty()) {
        throw Error(ErrorKind::invalid_grid, "interval grid is empty");
    }
    for (double t : T) {
        if (!std::isfinite(t) || t < 0.0) {
            throw Error(ErrorKind::invalid_grid, "interval grid values must be finite and >= 0");
        }
    }
}

inline void validate_phi_samples(std::span<const double> phi) {
    if (phi.empty()) {
        throw Error(ErrorKind::invalid_grid, "phi_S sample list is empty");
    }
    for (double p : phi) {
        if (!std::isfinite(p)) {
            throw Error(ErrorKind::invalid_grid, "phi_S samples must be finite");
        }
    }
}

inline void require_pure_state(const BlochVector &v) {
    require_finite(v);
    if (std::abs(v.norm() - 1.0) > 1e-9) {
        throw Error(ErrorKind::invalid_argument, "recorded state must lie on the unit sphere");
    }
}

/// Range of the 2π-periodic `f` over phi, sampled on `n` grid points and
/// refined by golden-section search within one grid step of each extremum.
template <std::invocable<double> F>
PhaseRange phase_range(F &&f, size_t n, double tolerance = 1e-10) {
    if (n == 0) {
        throw Error(ErrorKind::invalid_grid, "phi grid needs at least one sample");
    }
    auto phi = phi_grid(n);
    std::vector<double> values(n);
    for (size_t k = 0; k < n; ++k) {
        values[k] = f(phi[k]);
    }
    size_t kmax = static_cast<size_t>(std::max_element(values.begin(), values.end()) - values.begin());
    size_t kmin = static_cast<size_t>(std::min_element(values.begin(), values.end()) - values.begin());
    PhaseRange r;
    r.sampled_max = values[kmax];
    r.sampled_min = values[kmin];
    r.max = r.sampled_max;
    r.min = r.sampled_min;
    if (n >= 2) {
        double h = two_pi / static_cast<double>(n);
        auto up = golden_section_maximize(f, phi[kmax] - h, phi[kmax] + h, tolerance);
        auto down = golden_section_maximize([&f](double p) { return -f(p); }, phi[kmin] - h, phi[kmin] + h,
                                            tolerance);
        r.max = std::max(r.max, up.value);
        r.min = std::min(r.min, -down.value);
    }
    return r;
}

// ---------------------------------------------------------------------------

inline FlopCurve normal_flop(double delta_w, std::span<const double> T_grid) {
    validate_T_grid(T_grid);
    FrameSet frames(delta_w, delta_w, 0.0);
    FlopCurve curve;
    curve.T.assign(T_grid.begin(), T_grid.end());
    curve.p_e.reserve(T_grid.size());
    for (double T : T_grid) {
        curve.p_e.push_back(excitation_probability(simulate(normal_sequence(T), frames, BlochVector::ground())));
    }
    return curve;
}

namespace detail {

template <typename MakeTimeline>
FlopFamily flop_family(std::span<const double> T_grid, std::span<const double> phi_samples,
                       const FrameSet &frames, MakeTimeline &&make) {
    validate_T_grid(T_grid);
    validate_phi_samples(phi_samples);
    FlopFamily family;
    family.T.assign(T_grid.begin(), T_grid.end());
    for (double phi : phi_samples) {
        family.phi.push_back(reduce_angle(phi));
    }
    family.p_e.reserve(phi_samples.size());
    for (double phi : family.phi) {
        FrameSet f = frames.with_phase(phi);
        std::vector<double> row;
        row.reserve(T_grid.size());
        for (double T : T_grid) {
            row.push_back(excitation_probability(simulate(make(T), f, BlochVector::ground())));
        }
        family.p_e.push_back(std::move(row));
    }
    return family;
}

}  // namespace detail

inline FlopFamily scrambled_flop(double theta_s, double T1, std::span<const double> T_grid,
                                 std::span<const double> phi_samples, const FrameSet &frames) {
    return detail::flop_family(T_grid, phi_samples, frames,
                               [&](double T) { return scrambled_sequence(theta_s, T1, T); });
}

inline FlopFamily retrieved_flop(double theta_s, double T1, double T2, std::span<const double> T_grid,
                                 std::span<const double> phi_samples, const FrameSet &frames) {
    return detail::flop_family(T_grid, phi_samples, frames,
                               [&](double T) { return retrieved_sequence(theta_s, T1, T2, T); });
}

inline Sdbv sdbv(const BlochVector &recorded, double theta_s, size_t n_phi) {
    require_pure_state(recorded);
    if (n_phi == 0) {
        throw Error(ErrorKind::invalid_argument, "SDBV needs at least one phi_S sample");
    }
    Sdbv out{recorded, theta_s, phi_grid(n_phi), {}};
    out.points.reserve(n_phi);
    for (double phi : out.phi) {
        out.points.push_back(rotate_inplane(recorded, phi, theta_s));
    }
    return out;
}

/// SDBV after a further free precession by `wait_phase` and a read π/2
/// pulse, projected onto the xz-plane.
inline std::vector<ProjectedPoint> sdbv_projection_xz(const BlochVector &recorded, double theta_s,
                                                      double wait_phase, size_t n_phi) {
    require_finite(wait_phase, "wait_phase");
    auto s = sdbv(recorded, theta_s, n_phi);
    std::vector<ProjectedPoint> out;
    out.reserve(n_phi);
    for (size_t k = 0; k < n_phi; ++k) {
        BlochVector v = rotate_inplane(precess(s.points[k], wait_phase), 0.0, half_pi);
        out.push_back({s.phi[k], v.x, v.z});
    }
    return out;
}

/// Phase ambiguity of a recorded state: scramble(θ) at t = 0, wait T,
/// read(π/2), with r(T) = max - min of P_e over phi_S.
inline AmbiguityReport ambiguity_report(const BlochVector &recorded, double theta_s, std::span<const double> T_grid,
                                        size_t phi_samples, const FrameSet &frames) {
    require_pure_state(recorded);
    validate_T_grid(T_grid);
    if (phi_samples == 0) {
        throw Error(ErrorKind::invalid_grid, "phi_S sample count must be positive");
    }
    // P_e(phi, T) = (1 - <row_T, S(phi) v>) / 2 where row_T is the z-row of
    // read * precession(delta_W T) and S(phi) the scramble pulse at t = 0.
    Rotation read = inplane_rotation(0.0, half_pi);
    AmbiguityReport report;
    report.theta_s = theta_s;
    report.T.assign(T_grid.begin(), T_grid.end());
    report.range.reserve(T_grid.size());
    report.sampled_range.reserve(T_grid.size());
    for (double T : T_grid) {
        Rotation after = read * precession(frames.delta_w * T);
        BlochVector row{after.m[6], after.m[7], after.m[8]};
        auto p_e = [&](double phi) {
            BlochVector s = rotate_inplane(recorded, phi + frames.phi_s, theta_s);
            return std::clamp((1.0 - dot(row, s)) / 2.0, 0.0, 1.0);
        };
        PhaseRange r = phase_range(p_e, phi_samples);
        report.range.push_back(std::clamp(r.width(), 0.0, 1.0));
        report.sampled_range.push_back(std::clamp(r.sampled_width(), 0.0, 1.0));
    }
    report.aggregate = *std::min_element(report.range.begin(), report.range.end());
    report.sampled_aggregate = *std::min_element(report.sampled_range.begin(), report.sampled_range.end());
    return report;
}

struct OptimizerSettings {
    size_t scan_points = 361;
    double plateau_tolerance = 1e-9;
};

/// Scramble pulse area in [0, 2π) maximizing the aggregate ambiguity A(θ):
/// a uniform scan followed by golden-section refinement around the best scan
/// point. Ties resolve toward the smaller area. When several adjacent scan
/// points share the maximum, the midpoint of that plateau is returned.
inline ScrambleOptimum optimize_scramble_area(const BlochVector &recorded, std::span<const double> T_grid,
                                              size_t phi_samples, const FrameSet &frames, double tolerance,
                                              const OptimizerSettings &settings = {}) {
    if (!(tolerance > 0.0)) {
        throw Error(ErrorKind::invalid_argument, "optimizer tolerance must be positive");
    }
    if (settings.scan_points < 181) {
        throw Error(ErrorKind::invalid_argument, "optimizer scan needs at least 181 points");
    }
    require_pure_state(recorded);
    validate_T_grid(T_grid);
    auto A = [&](double theta) { return ambiguity_report(recorded, theta, T_grid, phi_samples, frames).aggregate; };

    ScrambleOptimum out;
    const size_t n = settings.scan_points;
    const double step = two_pi / static_cast<double>(n);
    size_t best = 0;
    for (size_t i = 0; i < n; ++i) {
        double theta = step * static_cast<double>(i);
        out.scan_theta.push_back(theta);
        out.scan_ambiguity.push_back(A(theta));
        if (out.scan_ambiguity[i] > out.scan_ambiguity[best] + 1e-12) {
            best = i;
        }
    }
    double top = out.scan_ambiguity[best];
    size_t lo = best;
    size_t hi = best;
    while (lo > 0 && out.scan_ambiguity[lo - 1] >= top - settings.plateau_tolerance) {
        --lo;
    }
    while (hi + 1 < n && out.scan_ambiguity[hi + 1] >= top - settings.plateau_tolerance) {
        ++hi;
    }
    out.plateau_lo = out.scan_theta[lo];
    out.plateau_hi = out.scan_theta[hi];

    if (hi > lo) {
        out.theta = 0.5 * (out.plateau_lo + out.plateau_hi);
        out.ambiguity = A(out.theta);
        return out;
    }
    double centre = out.scan_theta[best];
    auto refined = golden_section_maximize(A, centre - step, centre + step, tolerance);
    if (refined.value >= top) {
        out.theta = reduce_angle(refined.x);
        out.ambiguity = refined.value;
    } else {
        out.theta = centre;
        out.ambiguity = top;
    }
    return out;
}

}  // namespace ramsec

#endif
