#pragma once

// Kinematics of the dual-wheel caster-drive base.
//
// Two drive wheels (M1, M2) form an ordinary differential drive. The torso
// sits on a turret (M_T) whose axis is displaced by `turret_offset` (a)
// along the drive direction. Because the turret axis is off the wheel
// axis, the diff-drive yaw rate moves the turret point sideways, which
// makes the turret point holonomic in the plane:
//
//     v = r (wR + wL) / 2         w = r (wR - wL) / (2 b)
//     turret point velocity in the diff frame = (v, a w)
//     torso heading rate = w + wT
//
// Everything here is a pure function over value types.

#include <cmath>
#include <limits>

#include "angles.hpp"
#include "errors.hpp"

namespace quori {

struct BaseGeometry {
    double diameter = 0.48;        // m
    double wheel_radius = 0.05;    // m
    double half_track = 0.15;      // m, wheel contact to midpoint
    double turret_offset = 0.10;   // m, "a"
    double max_linear_speed = 0.6; // m/s
    double max_turret_rate = pi;   // rad/s

    // Wheel-rate bound implied by max_linear_speed: the largest wheel rate
    // any twist with |u| <= max_linear_speed can demand (psi_dot aside).
    double max_wheel_rate() const {
        double ratio = half_track / turret_offset;
        return max_linear_speed * std::sqrt(1.0 + ratio * ratio) / wheel_radius;
    }

    bool operator==(const BaseGeometry&) const = default;
};

// Pose of the wheel-axis midpoint plus turret angle relative to the
// diff-drive frame. Torso heading is derived, never stored.
struct BaseState {
    double x = 0.0;
    double y = 0.0;
    double phi = 0.0;
    double theta_t = 0.0;

    double torso_heading() const { return normalize_angle(phi + theta_t); }

    bool operator==(const BaseState&) const = default;
};

struct ActuatorRates {
    double omega_l = 0.0;  // rad/s
    double omega_r = 0.0;
    double omega_t = 0.0;
};

// Velocity of the turret point expressed in the torso frame.
struct BodyTwist {
    double ux = 0.0;       // m/s, torso forward
    double uy = 0.0;       // m/s, torso left
    double psi_dot = 0.0;  // rad/s
};

inline double linear_speed(const BodyTwist& t) { return std::hypot(t.ux, t.uy); }

namespace detail {

struct DiffRates {
    double v;
    double w;
};

inline DiffRates diff_rates(const ActuatorRates& r, const BaseGeometry& g) {
    return {g.wheel_radius * (r.omega_r + r.omega_l) / 2.0,
            g.wheel_radius * (r.omega_r - r.omega_l) / (2.0 * g.half_track)};
}

}  // namespace detail

inline BodyTwist forward_kinematics(const ActuatorRates& rates, const BaseState& state,
                                    const BaseGeometry& g) {
    auto [v, w] = detail::diff_rates(rates, g);
    double lateral = g.turret_offset * w;
    double c = std::cos(state.theta_t), s = std::sin(state.theta_t);
    // rotate by -theta_t into the torso frame
    return {c * v + s * lateral, -s * v + c * lateral, w + rates.omega_t};
}

// Bounds on actuator rates. Empty report means feasible; values exactly at a
// bound are feasible.
inline LimitReport check_limits(const ActuatorRates& rates, const BaseGeometry& g) {
    LimitReport report;
    const double wheel_max = g.max_wheel_rate();
    if (std::abs(rates.omega_l) > wheel_max)
        report.push_back({"wheel_rate_left", rates.omega_l, wheel_max});
    if (std::abs(rates.omega_r) > wheel_max)
        report.push_back({"wheel_rate_right", rates.omega_r, wheel_max});
    if (std::abs(rates.omega_t) > g.max_turret_rate)
        report.push_back({"turret_rate", rates.omega_t, g.max_turret_rate});
    return report;
}

inline LimitReport check_twist(const BodyTwist& twist, const BaseGeometry& g) {
    LimitReport report;
    double speed = linear_speed(twist);
    if (speed > g.max_linear_speed) report.push_back({"linear_speed", speed, g.max_linear_speed});
    return report;
}

// Unchecked inverse map. Requires turret_offset > 0.
inline ActuatorRates inverse_kinematics_unchecked(const BodyTwist& twist, const BaseState& state,
                                                  const BaseGeometry& g) {
    double c = std::cos(state.theta_t), s = std::sin(state.theta_t);
    double v = c * twist.ux - s * twist.uy;
    double lateral = s * twist.ux + c * twist.uy;
    double w = lateral / g.turret_offset;
    return {(v - g.half_track * w) / g.wheel_radius,
            (v + g.half_track * w) / g.wheel_radius,
            twist.psi_dot - w};
}

// Actuator rates realizing `twist`. Throws validation_error for a
// degenerate offset and limit_error (never clamps) for infeasible commands.
inline ActuatorRates inverse_kinematics(const BodyTwist& twist, const BaseState& state,
                                        const BaseGeometry& g) {
    if (!(g.turret_offset > 0.0))
        throw validation_error("turret_offset must be > 0: lateral motion unreachable",
                               "base.turret_offset");
    LimitReport report = check_twist(twist, g);
    ActuatorRates rates = inverse_kinematics_unchecked(twist, state, g);
    for (auto& v : check_limits(rates, g)) report.push_back(v);
    if (!report.empty()) throw limit_error(std::move(report));
    return rates;
}

// One dead-reckoning step with constant rates over dt.
//
// Heading is exact (constant w); translation uses the trapezoidal average of
// the start and end headings, a second-order scheme that is exact for w = 0.
// Angles are normalized after the step.
inline BaseState integrate_odometry(const BaseState& state, const ActuatorRates& rates, double dt,
                                    const BaseGeometry& g) {
    if (!(dt > 0.0)) throw validation_error("dt must be > 0", "dt");
    auto [v, w] = detail::diff_rates(rates, g);
    BaseState next = state;
    double phi1 = state.phi + w * dt;
    if (w == 0.0) {
        next.x += v * std::cos(state.phi) * dt;
        next.y += v * std::sin(state.phi) * dt;
    } else {
        next.x += v * dt * 0.5 * (std::cos(state.phi) + std::cos(phi1));
        next.y += v * dt * 0.5 * (std::sin(state.phi) + std::sin(phi1));
    }
    next.phi = normalize_angle(phi1);
    next.theta_t = normalize_angle(state.theta_t + rates.omega_t * dt);
    return next;
}

}  // namespace quori
