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

// Portable random streams.
//
// The engine is std::mt19937_64 seeded through std::seed_seq; both are fully
// specified by the standard, so raw output is identical everywhere. The
// <random> distributions are not, so the transforms to uniform, normal and
// binomial variates are implemented here. Stream `i` of seed `s` is seeded
// with the four 32-bit halves of (s, i); streams never share state.

#ifndef RAMSEC_RANDOM_HPP
#define RAMSEC_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <random>

#include "ramsec/error.hpp"

namespace ramsec {

class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
        engine_.seed(seq);
    }

    std::uint64_t next() {
        return engine_();
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    /// Standard normal, Box-Muller (one variate per call).
    double normal() {
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

    /// Exact binomial(n, p) draw by inversion. Outcomes are enumerated
    /// outward from the mode, so the expected cost is O(sqrt(n p (1-p))).
    std::uint64_t binomial(std::uint64_t n, double p) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw Error(ErrorKind::invalid_argument, "binomial probability must lie in [0, 1]");
        }
        if (n == 0 || p == 0.0) {
            return 0;
        }
        if (p == 1.0) {
            return n;
        }
        if (p > 0.5) {
            return n - binomial(n, 1.0 - p);
        }
        const double nd = static_cast<double>(n);
        const double odds = p / (1.0 - p);
        double u = uniform();
        if (nd * p < 30.0) {
            double pmf = std::exp(nd * std::log1p(-p));
            for (std::uint64_t k = 0; k < n; ++k) {
                u -= pmf;
                if (u < 0.0) {
                    return k;
                }
                pmf *= static_cast<double>(n - k) / static_cast<double>(k + 1) * odds;
            }
            return n;
        }
        const auto mode = static_cast<std::uint64_t>(std::floor((nd + 1.0) * p));
        const double md = static_cast<double>(mode);
        const double pmf_mode = std::exp(std::lgamma(nd + 1.0) - std::lgamma(md + 1.0) - std::lgamma(nd - md + 1.0) +
                                         md * std::log(p) + (nd - md) * std::log1p(-p));
        u -= pmf_mode;
        if (u < 0.0) {
            return mode;
        }
        std::uint64_t lo = mode;
        std::uint64_t hi = mode;
        double pmf_lo = pmf_mode;
        double pmf_hi = pmf_mode;
        while (lo > 0 || hi < n) {
            if (lo > 0) {
                pmf_lo *= static_cast<double>(lo) / (static_cast<double>(n - lo + 1) * odds);
                --lo;
                u -= pmf_lo;
                if (u < 0.0) {
                    return lo;
                }
            }
            if (hi < n) {
                pmf_hi *= static_cast<double>(n - hi) / static_cast<double>(hi + 1) * odds;
                ++hi;
                u -= pmf_hi;
                if (u < 0.0) {
                    return hi;
                }
            }
            if (pmf_lo < 1e-300 && pmf_hi < 1e-300) {
                break;
            }
        }
        // Only reachable through accumulated rounding in the tails.
        return mode;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace ramsec

#endif
