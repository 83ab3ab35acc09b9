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

// Damped-sinusoid fringe fit
//
//     y(T) = c + A exp(-T / tau) cos(omega T + chi)
//
// by Levenberg-Marquardt on the time axis rescaled to [0, 1]. The decay is
// carried as a rate (1/tau, clamped at 0) so that an undamped fringe is an
// interior point rather than tau = infinity.
//
// Initial guess, unless one is supplied:
//   c     mean of y
//   A     half the peak-to-peak of y
//   omega peak of the zero-padded discrete spectrum of y - c, parabolically
//         interpolated
//   chi   phase of the projection of y - c onto cos/sin at omega
//   tau   slope of the log RMS envelope between the two halves of the record
//
// Amplitude significance. With the fitted fringe m(T) and the residual
// variance s^2 = RSS / (n - 5), z = sum (m - c)^2 / (2 s^2) is the
// periodogram power of the fringe; for pure noise it is roughly Exp(1) at a
// fixed frequency. The frequency is searched over about n/2 independent
// values, so the amplitude is flagged degenerate when z < ln((n/2) / alpha)
// with false-alarm rate alpha = 1e-3.

#ifndef RAMSEC_FIT_HPP
#define RAMSEC_FIT_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "ramsec/error.hpp"

namespace ramsec {

struct FitParameters {
    double offset = 0.0;
    double amplitude = 0.0;
    double tau = std::numeric_limits<double>::infinity();
    double omega = 0.0;
    double phase = 0.0;

    double operator()(double T) const {
        double envelope = std::isinf(tau) ? 1.0 : std::exp(-T / tau);
        return offset + amplitude * envelope * std::cos(omega * T + phase);
    }
};

struct FitResult {
    FitParameters params;
    double rms = 0.0;
    bool converged = false;
    bool degenerate_amplitude = false;
    int iterations = 0;
    double significance = 0.0;
    double significance_threshold = 0.0;
};

struct FitSettings {
    int max_iterations = 500;
    double false_alarm = 1e-3;
};

namespace detail {

struct ScaledParams {
    // offset, amplitude, decay rate, angular frequency, phase; time in units
    // of `scale`.
    Eigen::Matrix<double, 5, 1> q;
};

inline double rss_of(std::span<const double> u, std::span<const double> y, const Eigen::Matrix<double, 5, 1> &q) {
    double s = 0.0;
    for (size_t i = 0; i < u.size(); ++i) {
        double m = q[0] + q[1] * std::exp(-q[2] * u[i]) * std::cos(q[3] * u[i] + q[4]);
        double r = y[i] - m;
        s += r * r;
    }
    return s;
}

inline FitParameters initial_guess(std::span<const double> u, std::span<const double> y) {
    const size_t n = u.size();
    FitParameters g;
    g.offset = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    g.amplitude = (*hi - *lo) / 2.0;

    // Spectrum on a grid 8x finer than one cycle per record, up to the
    // Nyquist rate of the mean spacing.
    const double w_step = two_pi / 8.0;
    const double w_nyquist = pi * static_cast<double>(n - 1);
    auto power = [&](double w) {
        std::complex<double> s{0.0, 0.0};
        for (size_t i = 0; i < n; ++i) {
            s += (y[i] - g.offset) * std::polar(1.0, -w * u[i]);
        }
        return std::norm(s);
    };
    double best_w = w_step;
    double best_p = -1.0;
    double p_prev = 0.0, p_best_prev = 0.0, p_best_next = 0.0;
    bool capture_next = false;
    for (double w = w_step; w <= w_nyquist; w += w_step) {
        double p = power(w);
        if (capture_next) {
            p_best_next = p;
            capture_next = false;
        }
        if (p > best_p) {
            best_p = p;
            best_w = w;
            p_best_prev = p_prev;
            p_best_next = 0.0;
            capture_next = true;
        }
        p_prev = p;
    }
    double denom = p_best_prev - 2.0 * best_p + p_best_next;
    if (best_w > w_step && denom < 0.0) {
        double shift = 0.5 * (p_best_prev - p_best_next) / denom;
        best_w += std::clamp(shift, -0.5, 0.5) * w_step;
    }
    g.omega = best_w;

    double a = 0.0, b = 0.0, cc = 0.0, ss = 0.0, cs = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double c = std::cos(best_w * u[i]);
        double s = std::sin(best_w * u[i]);
        double r = y[i] - g.offset;
        a += r * c;
        b += r * s;
        cc += c * c;
        ss += s * s;
        cs += c * s;
    }
    double det = cc * ss - cs * cs;
    double ca = det != 0.0 ? (a * ss - b * cs) / det : 0.0;
    double sb = det != 0.0 ? (b * cc - a * cs) / det : 0.0;
    g.phase = std::atan2(-sb, ca);

    // Envelope from the RMS of each half.
    size_t half = n / 2;
    auto rms = [&](size_t from, size_t to) {
        double s = 0.0;
        for (size_t i = from; i < to; ++i) {
            s += (y[i] - g.offset) * (y[i] - g.offset);
        }
        return std::sqrt(s / static_cast<double>(to - from));
    };
    double first = rms(0, half);
    double second = rms(half, n);
    double centre_gap = (u[(half + n) / 2] - u[half / 2]);
    double rate = (first > 0.0 && second > 0.0 && centre_gap > 0.0) ? std::log(first / second) / centre_gap : 0.0;
    g.tau = rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
    return g;
}

}  // namespace detail

inline FitResult fit_damped_sinusoid(std::span<const double> T, std::span<const double> y,
                                     std::optional<FitParameters> initial = std::nullopt,
                                     const FitSettings &settings = {}) {
    const size_t n = T.size();
    if (n != y.size()) {
        throw Error(ErrorKind::invalid_argument, "T and y must have the same length");
    }
    if (n < 6) {
        throw Error(ErrorKind::invalid_argument, "damped-sinusoid fit needs at least 6 points");
    }
    double scale = 0.0;
    for (size_t i = 0; i < n; ++i) {
        if (!std::isfinite(T[i]) || !std::isfinite(y[i])) {
            throw Error(ErrorKind::invalid_argument, "fit data must be finite");
        }
        scale = std::max(scale, std::abs(T[i]));
    }
    if (!(scale > 0.0)) {
        throw Error(ErrorKind::invalid_argument, "fit needs at least one non-zero T");
    }
    std::vector<double> u(n);
    for (size_t i = 0; i < n; ++i) {
        u[i] = T[i] / scale;
    }

    FitResult result;
    result.significance_threshold = std::log(0.5 * static_cast<double>(n) / settings.false_alarm);

    FitParameters guess;
    if (initial) {
        guess = *initial;
        guess.omega *= scale;
        guess.tau /= scale;
    } else {
        guess = detail::initial_guess(u, y);
    }
    auto [ylo, yhi] = std::minmax_element(y.begin(), y.end());
    if (*yhi - *ylo <= 1e-12 * std::max(1.0, std::abs(*yhi))) {
        // Flat record: nothing oscillates.
        result.params.offset = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
        result.params.amplitude = 0.0;
        result.params.omega = guess.omega / scale;
        result.rms = std::sqrt(detail::rss_of(u, y, Eigen::Matrix<double, 5, 1>{result.params.offset, 0, 0, 0, 0}) /
                               static_cast<double>(n));
        result.converged = true;
        result.degenerate_amplitude = true;
        return result;
    }

    using Vec5 = Eigen::Matrix<double, 5, 1>;
    using Mat5 = Eigen::Matrix<double, 5, 5>;
    Vec5 q{guess.offset, guess.amplitude, std::isinf(guess.tau) ? 0.0 : 1.0 / guess.tau, guess.omega, guess.phase};
    double rss = detail::rss_of(u, y, q);
    double lambda = 1e-3;
    Eigen::Matrix<double, Eigen::Dynamic, 5> J(n, 5);
    Eigen::VectorXd r(n);

    int it = 0;
    bool converged = false;
    for (; it < settings.max_iterations && !converged; ++it) {
        for (size_t i = 0; i < n; ++i) {
            double e = std::exp(-q[2] * u[i]);
            double c = std::cos(q[3] * u[i] + q[4]);
            double s = std::sin(q[3] * u[i] + q[4]);
            J(i, 0) = 1.0;
            J(i, 1) = e * c;
            J(i, 2) = -q[1] * u[i] * e * c;
            J(i, 3) = -q[1] * u[i] * e * s;
            J(i, 4) = -q[1] * e * s;
            r[i] = y[i] - (q[0] + q[1] * e * c);
        }
        Mat5 JtJ = J.transpose() * J;
        Vec5 g = J.transpose() * r;
        Vec5 diag = JtJ.diagonal().cwiseMax(1e-12 * JtJ.diagonal().maxCoeff());
        bool stepped = false;
        while (!stepped) {
            Mat5 H = JtJ;
            H.diagonal() += lambda * diag;
            Vec5 delta = H.ldlt().solve(g);
            if (q[2] <= 0.0 && delta[2] < 0.0) {
                // Rate pinned at its bound: solve for the other four.
                Vec5 gp = g;
                gp[2] = 0.0;
                H.row(2).setZero();
                H.col(2).setZero();
                H(2, 2) = 1.0;
                delta = H.ldlt().solve(gp);
            }
            Vec5 trial = q + delta;
            trial[2] = std::max(trial[2], 0.0);
            double trial_rss = detail::rss_of(u, y, trial);
            if (std::isfinite(trial_rss) && trial_rss <= rss) {
                double reduction = rss - trial_rss;
                Vec5 taken = trial - q;
                q = trial;
                rss = trial_rss;
                lambda = std::max(lambda / 10.0, 1e-15);
                stepped = true;
                bool small_step = true;
                for (int k = 0; k < 5; ++k) {
                    if (std::abs(taken[k]) > 1e-12 * (std::abs(q[k]) + 1e-12)) {
                        small_step = false;
                    }
                }
                if (rss == 0.0 || small_step || reduction <= 1e-16 * rss) {
                    converged = true;
                }
            } else {
                lambda *= 10.0;
                if (lambda > 1e16) {
                    // No descent direction left at working precision.
                    converged = true;
                    break;
                }
            }
        }
    }

    result.iterations = it;
    result.converged = converged;
    double amplitude = q[1];
    double phase = q[4];
    if (amplitude < 0.0) {
        amplitude = -amplitude;
        phase += pi;
    }
    result.params.offset = q[0];
    result.params.amplitude = amplitude;
    result.params.tau = q[2] > 0.0 ? scale / q[2] : std::numeric_limits<double>::infinity();
    result.params.omega = q[3] / scale;
    result.params.phase = reduce_angle(phase);
    if (result.params.omega < 0.0) {
        result.params.omega = -result.params.omega;
        result.params.phase = reduce_angle(-result.params.phase);
    }
    result.rms = std::sqrt(rss / static_cast<double>(n));

    double fringe = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double d = result.params(T[i]) - result.params.offset;
        fringe += d * d;
    }
    double noise_var = rss / static_cast<double>(n - 5);
    result.significance = noise_var > 0.0 ? fringe / (2.0 * noise_var)
                                          : (fringe > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    result.degenerate_amplitude = amplitude <= 1e-9 * std::max(1.0, std::abs(q[0])) ||
                                  result.significance < result.significance_threshold;
    return result;
}

}  // namespace ramsec

#endif
