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

// Two-frame pulse timeline engine.
//
// Everything is expressed in the rotating frame of the write-read
// interferometer (WRI). A Wait{dt} precesses the state by delta_W * dt, a WRI
// pulse rotates about +x, and a scramble-retrieve (SRI) pulse fired at
// absolute time t rotates about the in-plane axis at azimuth
//
//     eta(t) = (delta_W - delta_S) * t + phi_S.
//
// Pulses are instantaneous; only waits advance the clock.

#ifndef RAMSEC_SEQUENCE_HPP
#define RAMSEC_SEQUENCE_HPP

#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "ramsec/bloch.hpp"

namespace ramsec {

enum class Frame { wri, sri };

struct FrameSet {
    double delta_w = two_pi * 100.0;  // rad/s
    double delta_s = two_pi * 100.0;  // rad/s
    double phi_s = 0.0;               // rad, kept in [0, 2π)

    FrameSet() = default;
    FrameSet(double delta_w_, double delta_s_, double phi_s_) : delta_w(delta_w_), delta_s(delta_s_) {
        require_finite(delta_w, "delta_W");
        require_finite(delta_s, "delta_S");
        require_finite(phi_s_, "phi_S");
        phi_s = reduce_angle(phi_s_);
    }

    /// Detunings from the reference experiment: both 2π × 100 Hz.
    static FrameSet reference(double phi_s = 0.0) {
        return FrameSet(two_pi * 100.0, two_pi * 100.0, phi_s);
    }

    FrameSet with_phase(double phi) const {
        return FrameSet(delta_w, delta_s, phi);
    }

    friend bool operator==(const FrameSet &, const FrameSet &) = default;
};

struct Pulse {
    Frame frame = Frame::wri;
    double area = 0.0;  // rad
};

struct Wait {
    double duration = 0.0;  // s
};

using SequenceEvent = std::variant<Pulse, Wait>;

/// Physical pulse lengths of the reference setup. Annotation only; the
/// engine treats every pulse as instantaneous.
struct PulseDurations {
    double write_read = 0.45e-3;
    double scramble_retrieve = 2.75e-3;
};

class Timeline {
public:
    Timeline() = default;
    explicit Timeline(std::vector<SequenceEvent> events) : events_(std::move(events)) {
    }

    Timeline &pulse(Frame frame, double area) {
        events_.push_back(Pulse{frame, area});
        return *this;
    }
    Timeline &wait(double duration) {
        events_.push_back(Wait{duration});
        return *this;
    }

    std::span<const SequenceEvent> events() const {
        return events_;
    }
    size_t size() const {
        return events_.size();
    }

    /// Absolute firing time of every pulse (prefix sums of preceding waits).
    std::vector<double> pulse_times() const {
        std::vector<double> times;
        double t = 0.0;
        for (const auto &e : events_) {
            if (const auto *w = std::get_if<Wait>(&e)) {
                t += w->duration;
            } else {
                times.push_back(t);
            }
        }
        return times;
    }

    double total_duration() const {
        double t = 0.0;
        for (const auto &e : events_) {
            if (const auto *w = std::get_if<Wait>(&e)) {
                t += w->duration;
            }
        }
        return t;
    }

    void validate() const {
        for (const auto &e : events_) {
            if (const auto *w = std::get_if<Wait>(&e)) {
                if (!std::isfinite(w->duration) || w->duration < 0.0) {
                    throw Error(ErrorKind::invalid_timeline, "wait duration must be finite and >= 0");
                }
            } else if (!std::isfinite(std::get<Pulse>(e).area)) {
                throw Error(ErrorKind::invalid_timeline, "pulse area must be finite");
            }
        }
    }

    std::optional<PulseDurations> durations;

private:
    std::vector<SequenceEvent> events_;
};

/// Azimuth of the SRI pulse axis at absolute time `t`, in [0, 2π).
inline double sri_axis_angle(double t, const FrameSet &frames) {
    require_finite(t, "t");
    return reduce_angle((frames.delta_w - frames.delta_s) * t + frames.phi_s);
}

struct SimulationOptions {
    /// Extra WRI precession phase added to the last Wait of the timeline
    /// (per-shot oscillator phase noise).
    double final_wait_phase_offset = 0.0;
};

struct TrajectoryPoint {
    double time = 0.0;
    BlochVector state;
};

namespace detail {

inline void require_state(const BlochVector &v0) {
    require_finite(v0);
    if (v0.norm() > 1.0 + 1e-9) {
        throw Error(ErrorKind::invalid_argument, "initial Bloch vector lies outside the unit sphere");
    }
}

inline std::optional<size_t> last_wait_index(std::span<const SequenceEvent> events) {
    for (size_t i = events.size(); i-- > 0;) {
        if (std::holds_alternative<Wait>(events[i])) {
            return i;
        }
    }
    return std::nullopt;
}

// Walks the timeline, calling visit(time_after_event, state) after each event.
template <typename Visitor>
BlochVector run_events(const Timeline &timeline, const FrameSet &frames, BlochVector v,
                       const SimulationOptions &options, Visitor &&visit) {
    timeline.validate();
    auto events = timeline.events();
    auto jitter_at = options.final_wait_phase_offset != 0.0 ? last_wait_index(events) : std::nullopt;
    double t = 0.0;
    for (size_t i = 0; i < events.size(); ++i) {
        if (const auto *w = std::get_if<Wait>(&events[i])) {
            double beta = frames.delta_w * w->duration;
            if (jitter_at == i) {
                beta += options.final_wait_phase_offset;
            }
            v = precess(v, beta);
            t += w->duration;
        } else {
            const auto &p = std::get<Pulse>(events[i]);
            double phi = p.frame == Frame::wri ? 0.0 : sri_axis_angle(t, frames);
            v = rotate_inplane(v, phi, p.area);
        }
        visit(t, v);
    }
    return v;
}

}  // namespace detail

inline BlochVector simulate(const Timeline &timeline, const FrameSet &frames, const BlochVector &v0,
                            const SimulationOptions &options = {}) {
    detail::require_state(v0);
    return detail::run_events(timeline, frames, v0, options, [](double, const BlochVector &) {});
}

/// State after every event; element 0 is (0, v0).
inline std::vector<TrajectoryPoint> trajectory(const Timeline &timeline, const FrameSet &frames,
                                               const BlochVector &v0, const SimulationOptions &options = {}) {
    detail::require_state(v0);
    std::vector<TrajectoryPoint> points{{0.0, v0}};
    points.reserve(timeline.size() + 1);
    detail::run_events(timeline, frames, v0, options,
                       [&](double t, const BlochVector &v) { points.push_back({t, v}); });
    return points;
}

/// The whole timeline as one rotation operator.
inline Rotation propagator(const Timeline &timeline, const FrameSet &frames) {
    timeline.validate();
    Rotation total;
    double t = 0.0;
    for (const auto &e : timeline.events()) {
        if (const auto *w = std::get_if<Wait>(&e)) {
            total = precession(frames.delta_w * w->duration) * total;
            t += w->duration;
        } else {
            const auto &p = std::get<Pulse>(e);
            double phi = p.frame == Frame::wri ? 0.0 : sri_axis_angle(t, frames);
            total = inplane_rotation(phi, p.area) * total;
        }
    }
    return total;
}

}  // namespace ramsec

#endif
