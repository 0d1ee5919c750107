#pragma once

// Two-DoF shoulder: two motors drive a differential through friction-wheel
// and belt stages. Each motor path ends in a friction clutch that slips
// when the transmitted torque exceeds `clutch_torque`.
//
// Path coordinates s1, s2 are the clutch output angles referred to the
// joint. The differential combines them:
//
//     q_circ = (s1 + s2) / 2        q_abd = (s1 - s2) / 2
//
// and with no slip s_i = alpha_i / G, which gives the usual
// (q_circ, q_abd) = D (alpha1, alpha2) / G,  D = 1/2 [[1, 1], [1, -1]].

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "angles.hpp"
#include "errors.hpp"

namespace quori {

struct TransmissionSpec {
    double ratio = 16.0 * two_pi / 1.2;       // motor rad per joint rad
    double clutch_torque = 4.0;               // N·m per path, joint side
    double motor_torque_max = 0.15;           // N·m
    double motor_speed_max = 16.0;            // rev/s
    double abduction_limit = deg2rad(70.0);   // rad
    double output_encoder_res = deg2rad(0.022);
    double motor_encoder_res = deg2rad(0.075);
    double output_damping = 0.5;              // N·m·s/rad, joint side
    double slip_threshold_factor = 3.0;

    // Shoulder slip ring budget, checked when add-on joints are declared.
    int slip_ring_wires = 6;
    double slip_ring_current = 2.0;  // A per wire
    int addon_wires = 0;
    double addon_current = 0.0;

    double motor_speed_max_rad() const { return motor_speed_max * two_pi; }
    double joint_speed_max() const { return motor_speed_max_rad() / ratio; }

    // Worst-case joint angle error from one output reading and one
    // motor-implied reading.
    double combined_quantization() const {
        return output_encoder_res + motor_encoder_res / ratio;
    }
    double slip_threshold() const { return slip_threshold_factor * combined_quantization(); }

    bool operator==(const TransmissionSpec&) const = default;
};

inline void validate(const TransmissionSpec& s) {
    if (!(s.ratio > 1.0)) throw validation_error("gear ratio must be > 1", "arm.gear_ratio");
    if (!(s.motor_torque_max > 0.0))
        throw validation_error("motor torque limit must be > 0", "arm.motor_torque_max");
    if (!(s.motor_speed_max > 0.0))
        throw validation_error("motor speed limit must be > 0", "arm.motor_speed_max_rps");
    if (!(s.clutch_torque > 0.0))
        throw validation_error("clutch torque must be > 0", "arm.clutch_torque");
    if (s.clutch_torque > s.ratio * s.motor_torque_max)
        throw validation_error("clutch torque exceeds ratio x motor torque", "arm.clutch_torque");
    if (!(s.abduction_limit > 0.0) || s.abduction_limit > pi / 2)
        throw validation_error("abduction limit must be in (0, 90] deg", "arm.abduction_limit_deg");
    if (!(s.output_encoder_res > 0.0))
        throw validation_error("encoder resolution must be > 0", "arm.output_encoder_res_deg");
    if (!(s.motor_encoder_res > 0.0))
        throw validation_error("encoder resolution must be > 0", "arm.motor_encoder_res_deg");
    if (!(s.output_damping > 0.0))
        throw validation_error("output damping must be > 0", "arm.output_damping");
    if (!(s.slip_threshold_factor > 0.0))
        throw validation_error("slip threshold factor must be > 0", "arm.slip_threshold_factor");
    if (s.addon_wires < 0 || s.addon_wires > s.slip_ring_wires)
        throw validation_error("add-on joints need " + std::to_string(s.addon_wires) +
                                   " wires, slip ring has " + std::to_string(s.slip_ring_wires),
                               "arm.addon_wires");
    if (s.addon_current < 0.0 || s.addon_current > s.slip_ring_current)
        throw validation_error("add-on current exceeds slip ring rating", "arm.addon_current");
}

struct MotorAngles {
    double alpha1 = 0.0;
    double alpha2 = 0.0;
};

struct JointAngles {
    double circ = 0.0;
    double abd = 0.0;
};

inline JointAngles motor_to_joint(const MotorAngles& m, const TransmissionSpec& s) {
    return {(m.alpha1 + m.alpha2) / (2.0 * s.ratio), (m.alpha1 - m.alpha2) / (2.0 * s.ratio)};
}

inline MotorAngles joint_to_motor_unchecked(const JointAngles& q, const TransmissionSpec& s) {
    return {s.ratio * (q.circ + q.abd), s.ratio * (q.circ - q.abd)};
}

inline MotorAngles joint_to_motor(const JointAngles& q, const TransmissionSpec& s) {
    if (std::abs(q.abd) > s.abduction_limit)
        throw validation_error("abduction " + std::to_string(rad2deg(q.abd)) +
                                   " deg beyond +/-" + std::to_string(rad2deg(s.abduction_limit)),
                               "q_abd");
    return joint_to_motor_unchecked(q, s);
}

struct ArmState {
    double alpha1 = 0.0;  // motor shaft angles, unbounded
    double alpha2 = 0.0;
    double q_circ = 0.0;
    double q_abd = 0.0;
    double slip1 = 0.0;   // output minus motor-implied path angle since last calibration
    double slip2 = 0.0;
    double motor_ref1 = 0.0;  // motor angle that reads as joint zero
    double motor_ref2 = 0.0;

    bool operator==(const ArmState&) const = default;
};

struct MotorTorques {
    double tau1 = 0.0;
    double tau2 = 0.0;
};

struct JointTorques {
    double circ = 0.0;
    double abd = 0.0;
};

struct SlipEvent {
    int path = 0;             // 1 or 2
    double required = 0.0;    // torque the clutch would have had to carry
    double transmitted = 0.0; // = +/- clutch_torque
    double slip = 0.0;        // rad added to that path this step
};

struct ArmStepResult {
    ArmState state;
    JointTorques output;      // torque delivered to the joint by the clutches
    std::vector<SlipEvent> slips;
    bool hit_abduction_stop = false;
};

// One explicit step of the quasi-static transmission model.
//
// Motors are non-backdrivable speed sources: shaft speed scales linearly with
// commanded torque up to the no-load speed. Each clutch carries whatever
// torque keeps its output locked to the motor (joint damping minus external
// load); past clutch_torque it slips and transmits exactly clutch_torque,
// and the output then moves under that torque plus the load.
inline ArmStepResult step_dynamics(const ArmState& state, const MotorTorques& cmd,
                                   const JointTorques& load, double dt,
                                   const TransmissionSpec& s) {
    if (!(dt > 0.0)) throw validation_error("dt must be > 0", "dt");
    for (double t : {cmd.tau1, cmd.tau2})
        if (std::abs(t) > s.motor_torque_max)
            throw limit_error({{"motor_torque", t, s.motor_torque_max}});

    ArmStepResult r;
    r.state = state;
    const double taus[2] = {cmd.tau1, cmd.tau2};
    const double loads[2] = {(load.circ + load.abd) / 2.0, (load.circ - load.abd) / 2.0};
    double path_out[2] = {0.0, 0.0};
    double s_path[2] = {state.q_circ + state.q_abd, state.q_circ - state.q_abd};
    double* alpha[2] = {&r.state.alpha1, &r.state.alpha2};
    double* slip[2] = {&r.state.slip1, &r.state.slip2};

    for (int i = 0; i < 2; ++i) {
        double alpha_dot = s.motor_speed_max_rad() * taus[i] / s.motor_torque_max;
        double p_dot = alpha_dot / s.ratio;
        double required = s.output_damping * p_dot - loads[i];
        double s_dot = p_dot;
        double out = required;
        if (std::abs(required) > s.clutch_torque) {
            out = s.clutch_torque * sign(required);
            s_dot = (out + loads[i]) / s.output_damping;
            r.slips.push_back({i + 1, required, out, (s_dot - p_dot) * dt});
        }
        path_out[i] = out;
        *alpha[i] += alpha_dot * dt;
        s_path[i] += s_dot * dt;
        *slip[i] += (s_dot - p_dot) * dt;
    }

    double q_circ = (s_path[0] + s_path[1]) / 2.0;
    double q_abd = (s_path[0] - s_path[1]) / 2.0;
    if (std::abs(q_abd) > s.abduction_limit) {
        // Hard stop: the joint stays at the limit and the clutches absorb
        // the difference.
        double clamped = std::copysign(s.abduction_limit, q_abd);
        double excess = q_abd - clamped;
        r.state.slip1 -= excess;
        r.state.slip2 += excess;
        q_abd = clamped;
        r.hit_abduction_stop = true;
    }
    r.state.q_circ = q_circ;
    r.state.q_abd = q_abd;
    r.output = {path_out[0] + path_out[1], path_out[0] - path_out[1]};
    return r;
}

struct EncoderReadings {
    MotorAngles motor;
    JointAngles output;
};

inline double quantize(double x, double res) { return res * std::round(x / res); }

inline EncoderReadings read_encoders(const ArmState& st, const TransmissionSpec& s) {
    return {{quantize(st.alpha1, s.motor_encoder_res), quantize(st.alpha2, s.motor_encoder_res)},
            {quantize(st.q_circ, s.output_encoder_res), quantize(st.q_abd, s.output_encoder_res)}};
}

struct SlipEstimate {
    JointAngles slip;  // output-implied minus motor-implied joint angle
    bool flagged = false;
};

inline SlipEstimate detect_slip(const EncoderReadings& r, const TransmissionSpec& s,
                                const MotorAngles& motor_ref = {}) {
    JointAngles implied = motor_to_joint(
        {r.motor.alpha1 - motor_ref.alpha1, r.motor.alpha2 - motor_ref.alpha2}, s);
    SlipEstimate e;
    e.slip = {r.output.circ - implied.circ, r.output.abd - implied.abd};
    double worst = std::max(std::abs(e.slip.circ), std::abs(e.slip.abd));
    e.flagged = worst > s.slip_threshold();
    return e;
}

inline SlipEstimate detect_slip(const ArmState& st, const TransmissionSpec& s) {
    return detect_slip(read_encoders(st, s), s, {st.motor_ref1, st.motor_ref2});
}

// Re-reference the motors so the motor-implied joint angles match the output
// encoders, and clear the slip bookkeeping.
inline ArmState calibrate_boot(const EncoderReadings& r, const ArmState& st,
                               const TransmissionSpec& s) {
    ArmState out = st;
    MotorAngles at_output = joint_to_motor_unchecked(r.output, s);
    out.motor_ref1 = r.motor.alpha1 - at_output.alpha1;
    out.motor_ref2 = r.motor.alpha2 - at_output.alpha2;
    out.slip1 = 0.0;
    out.slip2 = 0.0;
    return out;
}

inline ArmState calibrate_boot(const ArmState& st, const TransmissionSpec& s) {
    return calibrate_boot(read_encoders(st, s), st, s);
}

}  // namespace quori
