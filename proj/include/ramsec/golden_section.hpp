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

#ifndef RAMSEC_GOLDEN_SECTION_HPP
#define RAMSEC_GOLDEN_SECTION_HPP

#include <cmath>
#include <concepts>

#include "ramsec/error.hpp"

namespace ramsec {

struct ScalarOptimum {
    double x = 0.0;
    double value = 0.0;
    int iterations = 0;
};

/// Golden-section search for the maximum of a unimodal `f` on [lo, hi].
/// Stops once the bracket is narrower than `tolerance`. Equal interior
/// values shrink the bracket toward `lo`. The best point ever evaluated,
/// endpoints included, is returned.
template <std::invocable<double> F>
ScalarOptimum golden_section_maximize(F &&f, double lo, double hi, double tolerance, int max_iterations = 200) {
    if (!(hi >= lo) || !(tolerance > 0.0)) {
        throw Error(ErrorKind::invalid_argument, "golden-section search needs lo <= hi and tolerance > 0");
    }
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);

    ScalarOptimum best{a, f(a), 0};
    auto consider = [&best](double x, double fx) {
        if (fx > best.value || (fx == best.value && x < best.x)) {
            best.x = x;
            best.value = fx;
        }
    };
    consider(c, fc);
    consider(d, fd);
    consider(b, f(b));

    int it = 0;
    for (; it < max_iterations && (b - a) > tolerance; ++it) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
            consider(c, fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
            consider(d, fd);
        }
    }
    best.iterations = it;
    return best;
}

}  // namespace ramsec

#endif
