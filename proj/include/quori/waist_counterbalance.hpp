#pragma once

// Point-mass model of the one-DoF waist ("metronome" counterbalance).
//
// Above the pivot: the upper body (head, arm transmissions) lumped at
// l_upper, and two arm links whose shoulders sit l_shoulder above the pivot
// with link CoM l_arm out along the flexion angle phi_a. Below the pivot:
// battery and counter masses. Waist angle is positive when bowing forward;
// torque is positive when the motor must resist a forward fall.
//
//   tau = g [ (m_u l_u + 2 m_a l_s - m_l l_l) sin(th) + 2 m_a l_a sin(th + phi) ]
//
// Default lever arms and link masses are calibration values chosen to
// reproduce a 16 N·m uncompensated peak at full bow and a sub-2 N·m peak
// with the battery plus 6 kg of counter mass. They are not measurements.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "angles.hpp"
#include "errors.hpp"

namespace quori {

struct PointMass {
    double mass = 0.0;   // kg
    double lever = 0.0;  // m below the pivot

    bool operator==(const PointMass&) const = default;
};

struct TorsoMassModel {
    double m_upper = 12.0;
    double l_upper = 0.226;
    double m_arm = 0.5;         // per arm link
    double l_shoulder = 0.25;
    double l_arm = 0.15;
    double m_lower = 18.0;      // battery + counter mass
    double l_lower = 0.165;
    std::vector<PointMass> extra_lower;  // further counter masses
    double i_extra = 0.0;       // kg·m²
    double damper_torque = 0.2; // N·m, Coulomb
    double gravity = 9.81;

    bool operator==(const TorsoMassModel&) const = default;
};

struct WaistLimits {
    double forward = deg2rad(30.0);  // max bow, rad (> 0)
    double back = deg2rad(15.0);     // max lean back, rad (> 0, applied as -back)
    double max_rate = 1.0;           // rad/s
    double max_accel = 1.0;          // rad/s²

    bool contains(double theta) const { return theta <= forward && theta >= -back; }
    bool operator==(const WaistLimits&) const = default;
};

// Everything the config file carries for the waist.
struct WaistConfig {
    WaistLimits limits;
    double m_upper = 12.0;
    double l_upper = 0.226;
    double m_arm = 0.5;
    double l_shoulder = 0.25;
    double l_arm = 0.15;
    double battery_mass = 12.0;
    double counter_mass = 6.0;
    double l_lower = 0.165;
    double i_extra = 0.0;
    double damper_torque = 0.2;
    double gravity = 9.81;
    double torque_bound = 3.0;  // N·m the waist actuator can deliver

    bool operator==(const WaistConfig&) const = default;
};

struct WaistPose {
    double theta_w = 0.0;
    double phi_a = 0.0;
    double theta_w_ddot = 0.0;
};

inline TorsoMassModel model_with_lower_mass(const WaistConfig& c, double m_lower) {
    TorsoMassModel m;
    m.m_upper = c.m_upper;
    m.l_upper = c.l_upper;
    m.m_arm = c.m_arm;
    m.l_shoulder = c.l_shoulder;
    m.l_arm = c.l_arm;
    m.m_lower = m_lower;
    m.l_lower = c.l_lower;
    m.i_extra = c.i_extra;
    m.damper_torque = c.damper_torque;
    m.gravity = c.gravity;
    return m;
}

inline TorsoMassModel compensated_model(const WaistConfig& c) {
    return model_with_lower_mass(c, c.battery_mass + c.counter_mass);
}
inline TorsoMassModel battery_only_model(const WaistConfig& c) {
    return model_with_lower_mass(c, c.battery_mass);
}
inline TorsoMassModel uncompensated_model(const WaistConfig& c) {
    return model_with_lower_mass(c, 0.0);
}

inline double lower_moment(const TorsoMassModel& m) {
    double s = m.m_lower * m.l_lower;
    for (const auto& p : m.extra_lower) s += p.mass * p.lever;
    return s;
}

// First moment about the pivot of everything except the arm links' offset.
inline double net_first_moment(const TorsoMassModel& m) {
    return m.m_upper * m.l_upper + 2.0 * m.m_arm * m.l_shoulder - lower_moment(m);
}

// Per-arm generalization; the shared-angle form below calls this.
inline double holding_torque_unchecked(const TorsoMassModel& m, double theta_w, double phi_left,
                                       double phi_right) {
    return m.gravity * (net_first_moment(m) * std::sin(theta_w) +
                        m.m_arm * m.l_arm *
                            (std::sin(theta_w + phi_left) + std::sin(theta_w + phi_right)));
}

inline void require_within(const WaistLimits& lim, double theta_w) {
    if (!lim.contains(theta_w))
        throw validation_error("waist angle " + std::to_string(rad2deg(theta_w)) +
                                   " deg outside limits",
                               "theta_w");
}

inline double holding_torque(const TorsoMassModel& m, const WaistPose& pose,
                             const WaistLimits& lim = {}) {
    require_within(lim, pose.theta_w);
    return holding_torque_unchecked(m, pose.theta_w, pose.phi_a, pose.phi_a);
}

struct PeakTorque {
    double torque = 0.0;   // |tau|, N·m
    double theta_w = 0.0;  // argmax pose
    double phi_a = 0.0;    // in [0, 2pi)
};

// Worst arm angle for a given waist angle: the arm term adds to the gravity
// term at full magnitude, i.e. phi = 90° - theta (or 270° - theta when the
// body term is negative).
inline double worst_arm_angle(const TorsoMassModel& m, double theta_w) {
    double body = net_first_moment(m) * std::sin(theta_w);
    return wrap_positive((body >= 0 ? pi / 2 : 3 * pi / 2) - theta_w);
}

// max |tau| over theta_w in [-back, forward] and phi_a in [0, 2pi).
//
// For fixed theta the inner max is g(|N sin th| + 2 m_a l_a), which grows
// with |sin th|, so only the two waist limits need checking.
inline PeakTorque peak_holding_torque(const TorsoMassModel& m, const WaistLimits& lim = {}) {
    PeakTorque best;
    best.torque = -1.0;
    for (double theta : {lim.forward, -lim.back}) {
        double phi = worst_arm_angle(m, theta);
        double tau = std::abs(holding_torque_unchecked(m, theta, phi, phi));
        if (tau > best.torque) best = {tau, theta, phi};
    }
    return best;
}

// Fig.-7-style curve: holding torque at a fixed waist angle as the arms
// sweep a full revolution.
struct SweepSample {
    double phi_a = 0.0;
    double torque = 0.0;
};

inline std::vector<SweepSample> sweep_arm_flexion(const TorsoMassModel& m, double theta_w,
                                                  double step_rad) {
    std::vector<SweepSample> out;
    int n = static_cast<int>(std::lround(two_pi / step_rad));
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        double phi = i * step_rad;
        out.push_back({phi, holding_torque_unchecked(m, theta_w, phi, phi)});
    }
    return out;
}

// Point-mass inertia about the pivot. Arm link distance from the pivot
// depends on phi through the law of cosines.
inline double waist_inertia(const TorsoMassModel& m, double phi_left, double phi_right) {
    auto arm_d2 = [&](double phi) {
        return m.l_shoulder * m.l_shoulder + m.l_arm * m.l_arm +
               2.0 * m.l_shoulder * m.l_arm * std::cos(phi);
    };
    double i = m.m_upper * m.l_upper * m.l_upper + m.m_arm * (arm_d2(phi_left) + arm_d2(phi_right)) +
               m.m_lower * m.l_lower * m.l_lower + m.i_extra;
    for (const auto& p : m.extra_lower) i += p.mass * p.lever * p.lever;
    return i;
}

struct WaistTorque {
    double holding = 0.0;
    double inertial = 0.0;
    double damper = 0.0;

    double total() const { return holding + inertial + damper; }
};

inline WaistTorque waist_torque_unchecked(const TorsoMassModel& m, double theta_w, double phi_left,
                                          double phi_right, double theta_dot, double theta_ddot) {
    return {holding_torque_unchecked(m, theta_w, phi_left, phi_right),
            waist_inertia(m, phi_left, phi_right) * theta_ddot,
            m.damper_torque * sign(theta_dot)};
}

inline WaistTorque total_motor_torque(const TorsoMassModel& m, const WaistPose& pose,
                                      double theta_dot, const WaistLimits& lim = {}) {
    require_within(lim, pose.theta_w);
    if (std::abs(theta_dot) > lim.max_rate)
        throw validation_error("waist rate exceeds limit", "theta_w_dot");
    if (std::abs(pose.theta_w_ddot) > lim.max_accel)
        throw validation_error("waist acceleration exceeds limit", "theta_w_ddot");
    return waist_torque_unchecked(m, pose.theta_w, pose.phi_a, pose.phi_a, theta_dot,
                                  pose.theta_w_ddot);
}

struct CounterMassTuning {
    double added_mass = 0.0;  // kg
    PeakTorque peak;          // peak after adding the mass
};

// Smallest mass added at `lever` below the pivot such that the peak holding
// torque is <= target. Bisection over [0, balance mass]; the peak is
// monotone non-increasing there.
inline CounterMassTuning tune_counter_mass(const TorsoMassModel& model, double target_peak,
                                           double lever, const WaistLimits& lim = {}) {
    if (!(lever > 0.0)) throw validation_error("counter mass lever must be > 0", "lever");
    auto with_mass = [&](double x) {
        TorsoMassModel m = model;
        if (x > 0.0) m.extra_lower.push_back({x, lever});
        return m;
    };
    PeakTorque p0 = peak_holding_torque(model, lim);
    if (p0.torque <= target_peak) return {0.0, p0};

    double balance = net_first_moment(model) / lever;
    PeakTorque pb = peak_holding_torque(with_mass(std::max(balance, 0.0)), lim);
    if (balance <= 0.0 || pb.torque > target_peak) {
        const PeakTorque& at = balance <= 0.0 ? p0 : pb;
        throw validation_error("target peak " + std::to_string(target_peak) +
                                   " N·m infeasible: best achievable " +
                                   std::to_string(at.torque) + " N·m at theta_w=" +
                                   std::to_string(rad2deg(at.theta_w)) + " deg, phi_a=" +
                                   std::to_string(rad2deg(at.phi_a)) + " deg",
                               "target_peak");
    }
    double lo = 0.0, hi = balance;
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        double mid = 0.5 * (lo + hi);
        if (peak_holding_torque(with_mass(mid), lim).torque <= target_peak)
            hi = mid;
        else
            lo = mid;
    }
    return {hi, peak_holding_torque(with_mass(hi), lim)};
}

}  // namespace quori
