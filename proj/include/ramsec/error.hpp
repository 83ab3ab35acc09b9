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

#ifndef RAMSEC_ERROR_HPP
#define RAMSEC_ERROR_HPP

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ramsec {

enum class ErrorKind {
    invalid_argument,
    invalid_state,
    invalid_timeline,
    invalid_grid,
    infeasible_timing,
    protocol_misconfiguration,
    indeterminate,
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::invalid_argument:
            return "invalid-argument";
        case ErrorKind::invalid_state:
            return "invalid-state";
        case ErrorKind::invalid_timeline:
            return "invalid-timeline";
        case ErrorKind::invalid_grid:
            return "invalid-grid";
        case ErrorKind::infeasible_timing:
            return "infeasible-timing";
        case ErrorKind::protocol_misconfiguration:
            return "protocol-misconfiguration";
        case ErrorKind::indeterminate:
            return "indeterminate";
    }
    return "unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string &what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {
    }

    ErrorKind kind() const noexcept {
        return kind_;
    }

private:
    ErrorKind kind_;
};

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Reduces any finite angle to [0, 2π).
inline double reduce_angle(double angle) {
    double r = std::fmod(angle, two_pi);
    if (r < 0.0) {
        r += two_pi;
    }
    // fmod + shift can round up to exactly 2π.
    if (r >= two_pi) {
        r = 0.0;
    }
    return r;
}

/// Distance of `angle` from the nearest multiple of 2π, in [0, π].
inline double wrap_distance(double angle) {
    double r = reduce_angle(angle);
    return std::min(r, two_pi - r);
}

inline void require_finite(double value, const char *name) {
    if (!std::isfinite(value)) {
        throw Error(ErrorKind::invalid_argument, std::string(name) + " must be finite");
    }
}

}  // namespace ramsec

#endif
