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

// Geometric kernel for a two-level ensemble on the unit Bloch sphere.
//
// Conventions:
//   * |g> = (0, 0, +1), |e> = (0, 0, -1); P_e = (1 - z) / 2.
//   * Rotations follow the right-hand rule.
//   * Figures drawn on a radius-1/2 sphere (spin expectation values) have
//     every length halved relative to this one.

#ifndef RAMSEC_BLOCH_HPP
#define RAMSEC_BLOCH_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>

#include "ramsec/error.hpp"

namespace ramsec {

struct BlochVector {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    static constexpr BlochVector ground() {
        return {0.0, 0.0, 1.0};
    }
    static constexpr BlochVector excited() {
        return {0.0, 0.0, -1.0};
    }
    /// Equator point at azimuth `a`.
    static BlochVector equator(double a) {
        return {std::cos(a), std::sin(a), 0.0};
    }

    double norm() const {
        return std::sqrt(x * x + y * y + z * z);
    }
    bool is_finite() const {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
    }

    friend bool operator==(const BlochVector &, const BlochVector &) = default;
};

inline BlochVector operator+(const BlochVector &a, const BlochVector &b) {
    return {a.x + b.x, a.y + b.y, a.z + b.z};
}
inline BlochVector operator-(const BlochVector &a, const BlochVector &b) {
    return {a.x - b.x, a.y - b.y, a.z - b.z};
}
inline BlochVector operator*(double s, const BlochVector &v) {
    return {s * v.x, s * v.y, s * v.z};
}
inline double dot(const BlochVector &a, const BlochVector &b) {
    return a.x * b.x + a.y * b.y + a.z * b.z;
}
inline BlochVector cross(const BlochVector &a, const BlochVector &b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double distance(const BlochVector &a, const BlochVector &b) {
    return (a - b).norm();
}

inline std::ostream &operator<<(std::ostream &out, const BlochVector &v) {
    return out << "(" << v.x << ", " << v.y << ", " << v.z << ")";
}

/// Rotation axis in the xy-plane, (cos φ, sin φ, 0).
class InPlaneAxis {
public:
    explicit InPlaneAxis(double phi) {
        require_finite(phi, "axis azimuth");
        phi_ = reduce_angle(phi);
    }

    double phi() const {
        return phi_;
    }
    BlochVector direction() const {
        return {std::cos(phi_), std::sin(phi_), 0.0};
    }

private:
    double phi_;
};

/// Row-major 3x3 rotation; used to compose whole pulse sequences into one operator.
struct Rotation {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    static Rotation identity() {
        return {};
    }

    BlochVector apply(const BlochVector &v) const {
        return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
                m[3] * v.x + m[4] * v.y + m[5] * v.z,
                m[6] * v.x + m[7] * v.y + m[8] * v.z};
    }

    /// (a * b) applies b first.
    friend Rotation operator*(const Rotation &a, const Rotation &b) {
        Rotation r;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k) {
                    s += a.m[3 * i + k] * b.m[3 * k + j];
                }
                r.m[3 * i + j] = s;
            }
        }
        return r;
    }

    double max_abs_difference(const Rotation &other) const {
        double d = 0.0;
        for (size_t i = 0; i < m.size(); ++i) {
            d = std::max(d, std::abs(m[i] - other.m[i]));
        }
        return d;
    }
};

/// Rotation by `theta` about (cos φ, sin φ, 0).
inline Rotation inplane_rotation(double phi, double theta) {
    require_finite(phi, "phi");
    require_finite(theta, "theta");
    InPlaneAxis axis(phi);
    double kx = std::cos(axis.phi());
    double ky = std::sin(axis.phi());
    double t = reduce_angle(theta);
    double c = std::cos(t);
    double s = std::sin(t);
    double one_c = 1.0 - c;
    // Rodrigues with k_z = 0.
    return Rotation{{c + kx * kx * one_c, kx * ky * one_c, ky * s,
                     kx * ky * one_c, c + ky * ky * one_c, -kx * s,
                     -ky * s, kx * s, c}};
}

/// Rotation by `beta` about +z.
inline Rotation precession(double beta) {
    require_finite(beta, "beta");
    double b = reduce_angle(beta);
    double c = std::cos(b);
    double s = std::sin(b);
    return Rotation{{c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0}};
}

inline void require_finite(const BlochVector &v) {
    if (!v.is_finite()) {
        throw Error(ErrorKind::invalid_argument, "Bloch vector must be finite");
    }
}

/// Pulse of area `theta` about the in-plane axis at azimuth `phi`.
inline BlochVector rotate_inplane(const BlochVector &v, double phi, double theta) {
    require_finite(v);
    return inplane_rotation(phi, theta).apply(v);
}

/// Free precession by `beta` about +z; z is left untouched.
inline BlochVector precess(const BlochVector &v, double beta) {
    require_finite(v);
    Rotation r = precession(beta);
    return {r.m[0] * v.x + r.m[1] * v.y, r.m[3] * v.x + r.m[4] * v.y, v.z};
}

inline constexpr double probability_tolerance = 1e-9;

inline double excitation_probability(const BlochVector &v) {
    if (!std::isfinite(v.z) || std::abs(v.z) > 1.0 + probability_tolerance) {
        throw Error(ErrorKind::invalid_state, "Bloch z-component outside [-1, 1]");
    }
    return std::clamp((1.0 - v.z) / 2.0, 0.0, 1.0);
}

}  // namespace ramsec

#endif
