#pragma once

// Fixed-timestep simulation of the museum loop: scenario files supply
// ground-truth visitor tracks, the behavior engine turns them into
// commands, and the base, waist and arm models integrate the result.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "angles.hpp"
#include "arm_transmission.hpp"
#include "base_kinematics.hpp"
#include "behavior_engine.hpp"
#include "errors.hpp"
#include "platform_config.hpp"
#include "sensor_geometry.hpp"
#include "text.hpp"
#include "waist_counterbalance.hpp"

namespace quori {

// ------------------------------------------------------------ scenario file

struct ScenarioVisitor {
    int id = 0;
    double x = 0.0;  // world frame, m
    double y = 0.0;
    double left_arm = 0.0;   // rad, visitor's arm abduction
    double right_arm = 0.0;
};

struct ScenarioKeyframe {
    double t = 0.0;
    std::vector<ScenarioVisitor> visitors;  // sorted by id
};

struct Scenario {
    std::vector<ScenarioKeyframe> keyframes;  // strictly increasing t
};

inline constexpr std::string_view kScenarioHeader =
    "t_s,visitor_id,x_m,y_m,left_arm_deg,right_arm_deg";

// Rows sharing a timestamp form one keyframe. A row with an empty
// visitor_id marks a keyframe with nobody around. Arm columns may be blank
// (0 deg).
inline Scenario parse_scenario_csv(std::string_view doc) {
    Scenario s;
    int lineno = 0;
    bool header_seen = false;
    std::set<double> empty_marks;
    for (auto raw : text::split_lines(doc)) {
        ++lineno;
        auto line = text::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        auto f = text::split_csv(line);
        if (!header_seen) {
            std::string joined;
            for (size_t i = 0; i < f.size(); ++i) joined += (i ? "," : "") + std::string(f[i]);
            if (joined != kScenarioHeader)
                throw parse_error("expected header '" + std::string(kScenarioHeader) + "'", lineno);
            header_seen = true;
            continue;
        }
        if (f.size() != 6) throw parse_error("expected 6 columns", lineno);
        auto t = text::parse_double(f[0]);
        if (!t || !std::isfinite(*t) || *t < 0.0) throw parse_error("bad t_s", lineno);
        if (!s.keyframes.empty() && *t < s.keyframes.back().t)
            throw parse_error("timestamps must not decrease", lineno);
        if (s.keyframes.empty() || *t > s.keyframes.back().t) s.keyframes.push_back({*t, {}});
        ScenarioKeyframe& k = s.keyframes.back();

        if (f[1].empty()) {
            if (!k.visitors.empty()) throw parse_error("empty-frame row mixed with visitors", lineno);
            empty_marks.insert(*t);
            continue;
        }
        if (empty_marks.count(*t)) throw parse_error("visitor row in an empty frame", lineno);
        auto id = text::parse_int(f[1]);
        auto x = text::parse_double(f[2]);
        auto y = text::parse_double(f[3]);
        if (!id) throw parse_error("bad visitor_id", lineno);
        if (!x || !y || !std::isfinite(*x) || !std::isfinite(*y))
            throw parse_error("bad visitor position", lineno);
        auto arm = [&](std::string_view v) -> double {
            if (v.empty()) return 0.0;
            auto d = text::parse_double(v);
            if (!d || !std::isfinite(*d)) throw parse_error("bad arm angle", lineno);
            return deg2rad(*d);
        };
        ScenarioVisitor sv{static_cast<int>(*id), *x, *y, arm(f[4]), arm(f[5])};
        for (const auto& o : k.visitors)
            if (o.id == sv.id) throw parse_error("duplicate visitor in one frame", lineno);
        k.visitors.push_back(sv);
    }
    if (!header_seen) throw parse_error("missing header", lineno);
    for (auto& k : s.keyframes)
        std::sort(k.visitors.begin(), k.visitors.end(),
                  [](const ScenarioVisitor& a, const ScenarioVisitor& b) { return a.id < b.id; });
    return s;
}

inline Scenario load_scenario_file(const std::string& path) {
    return parse_scenario_csv(read_text_file(path));
}

// Visitors at time t: linear interpolation between keyframes for visitors
// present in both, otherwise the earlier keyframe holds. Nobody exists
// before the first keyframe.
inline std::vector<ScenarioVisitor> visitors_at(const Scenario& s, double t) {
    const auto& k = s.keyframes;
    auto after = std::upper_bound(k.begin(), k.end(), t,
                                  [](double v, const ScenarioKeyframe& f) { return v < f.t; });
    if (after == k.begin()) return {};
    const ScenarioKeyframe& a = *std::prev(after);
    if (after == k.end()) return a.visitors;
    const ScenarioKeyframe& b = *after;
    double u = (t - a.t) / (b.t - a.t);
    std::vector<ScenarioVisitor> out;
    for (const auto& va : a.visitors) {
        ScenarioVisitor v = va;
        for (const auto& vb : b.visitors) {
            if (vb.id != va.id) continue;
            v.x = va.x + u * (vb.x - va.x);
            v.y = va.y + u * (vb.y - va.y);
            v.left_arm = va.left_arm + u * (vb.left_arm - va.left_arm);
            v.right_arm = va.right_arm + u * (vb.right_arm - va.right_arm);
        }
        out.push_back(v);
    }
    return out;
}

// ------------------------------------------------------------------ run log

struct StepRecord {
    long long t_ms = 0;
    BaseState base;
    ActuatorRates rates;
    double waist = 0.0;
    double waist_rate = 0.0;
    double waist_accel = 0.0;
    WaistTorque torque;
    ArmState left;
    ArmState right;
    Mode mode = Mode::Sleep;
    std::optional<int> engaged;
    CommandFrame command;
    int slip_events = 0;
};

struct RunLog {
    std::string scenario;
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;  // the simulation draws no random numbers
    long long dt_ms = 10;
    PlatformConfig config;
    std::vector<StepRecord> records;
};

namespace detail {

inline long long whole_ms(double seconds, const char* key) {
    double ms = seconds * 1000.0;
    long long n = std::llround(ms);
    if (n < 1 || std::abs(ms - static_cast<double>(n)) > 1e-6)
        throw validation_error("must be a positive whole number of milliseconds", key);
    return n;
}

inline Vec2 rotate(const Vec2& v, double a) {
    double c = std::cos(a), s = std::sin(a);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

// Turret axis in world coordinates.
inline Vec2 turret_position(const BaseState& b, const BaseGeometry& g) {
    Vec2 off = rotate({g.turret_offset, 0.0}, b.phi);
    return {b.x + off.x, b.y + off.y};
}

inline PerceptionFrame perceive(const std::vector<ScenarioVisitor>& visitors, double t,
                                const BaseState& base, double waist, const PlatformConfig& cfg) {
    PerceptionFrame f;
    f.timestamp = t;
    f.torso_heading = base.torso_heading();
    Vec2 axis = turret_position(base, cfg.base);
    for (const auto& v : visitors) {
        VisitorObservation o;
        o.id = v.id;
        o.position = rotate({v.x - axis.x, v.y - axis.y}, -f.torso_heading);
        o.left_arm = {0.0, v.left_arm};
        o.right_arm = {0.0, v.right_arm};
        o.in_camera_fov =
            o.range() <= cfg.behavior.perception_range &&
            point_in_camera_fov({o.position.x, o.position.y, cfg.behavior.visitor_height},
                                cfg.camera, waist, cfg.waist.limits);
        f.visitors.push_back(o);
    }
    return f;
}

// Uniformly shrink a twist until the actuators can follow it.
inline ActuatorRates feasible_rates(BodyTwist twist, const BaseState& state,
                                    const BaseGeometry& g, bool& clamped) {
    ActuatorRates r = inverse_kinematics_unchecked(twist, state, g);
    double k = 1.0;
    for (const auto& v : check_limits(r, g)) k = std::min(k, v.limit / std::abs(v.value));
    if (k < 1.0) {
        clamped = true;
        // The scaled rate that hit its bound can land one ulp past it.
        double wm = g.max_wheel_rate(), tm = g.max_turret_rate;
        r = {std::clamp(r.omega_l * k, -wm, wm), std::clamp(r.omega_r * k, -wm, wm),
             std::clamp(r.omega_t * k, -tm, tm)};
    }
    return r;
}

inline void require_clean(const LimitReport& rep, long long t_ms) {
    if (!rep.empty())
        throw std::logic_error("unclamped limit violation at t=" + text::fmt_ms(t_ms) + ": " +
                               describe(rep));
}

}  // namespace detail

// Arms hang straight down at joint zero; the waist model measures arm
// flexion from the torso's upward axis.
inline double hanging_flexion(double q_circ) { return pi + q_circ; }

inline RunLog run_scenario(const Scenario& scn, const PlatformConfig& cfg, double duration,
                           std::string name = "scenario") {
    validate(cfg);
    if (!(duration > 0.0) || !std::isfinite(duration))
        throw validation_error("duration must be > 0", "duration");
    RunLog log;
    log.scenario = std::move(name);
    log.config_hash = config_hash(cfg);
    log.config = cfg;
    log.dt_ms = detail::whole_ms(cfg.sim.dt, "sim.dt");
    const double dt = log.dt_ms / 1000.0;
    const long long end_ms = std::llround(duration * 1000.0);
    const long long steps = end_ms / log.dt_ms;

    const TorsoMassModel torso = compensated_model(cfg.waist);
    const TransmissionSpec& arm = cfg.arm;
    const WaistLimits& wl = cfg.waist.limits;
    const double g = cfg.waist.gravity;

    BaseState base;
    double waist = 0.0, waist_rate = 0.0;
    ArmState left, right;
    BehaviorState beh;
    log.records.reserve(static_cast<size_t>(steps + 1));

    for (long long i = 0; i <= steps; ++i) {
        const long long t_ms = i * log.dt_ms;
        const double t = t_ms / 1000.0;
        PerceptionFrame frame = detail::perceive(visitors_at(scn, t), t, base, waist, cfg);
        auto [next_beh, cmd] = step(std::move(beh), frame, dt, cfg);
        beh = std::move(next_beh);

        // Base.
        ActuatorRates rates{0.0, 0.0, cmd.turret_rate};
        if (cfg.behavior.free_roam)
            rates = detail::feasible_rates({cmd.base_ux, cmd.base_uy, cmd.turret_rate}, base,
                                           cfg.base, cmd.clamped);
        detail::require_clean(check_limits(rates, cfg.base), t_ms);
        if (!wl.contains(cmd.waist_target))
            throw std::logic_error("unclamped waist target at t=" + text::fmt_ms(t_ms));
        for (const ArmTarget& a : {cmd.left, cmd.right})
            if (std::abs(a.q_abd) > arm.abduction_limit)
                throw std::logic_error("unclamped abduction target at t=" + text::fmt_ms(t_ms));

        // Waist: rate- and acceleration-limited tracking.
        double want = std::clamp(cfg.sim.waist_gain * (cmd.waist_target - waist), -wl.max_rate,
                                 wl.max_rate);
        double accel = std::clamp((want - waist_rate) / dt, -wl.max_accel, wl.max_accel);
        WaistTorque tau =
            waist_torque_unchecked(torso, waist, hanging_flexion(left.q_circ),
                                   hanging_flexion(right.q_circ), waist_rate, accel);

        StepRecord rec;
        rec.t_ms = t_ms;
        rec.base = base;
        rec.rates = rates;
        rec.waist = waist;
        rec.waist_rate = waist_rate;
        rec.waist_accel = accel;
        rec.torque = tau;
        rec.left = left;
        rec.right = right;
        rec.mode = beh.mode;
        rec.engaged = beh.engaged;
        rec.command = cmd;

        // Advance to the next step.
        base = integrate_odometry(base, rates, dt, cfg.base);
        double next_rate = std::clamp(waist_rate + accel * dt, -wl.max_rate, wl.max_rate);
        double next_waist = waist + next_rate * dt;
        if (!wl.contains(next_waist)) {
            next_waist = std::clamp(next_waist, -wl.back, wl.forward);
            next_rate = 0.0;
        }
        waist = next_waist;
        waist_rate = next_rate;

        auto drive_arm = [&](ArmState& st, const ArmTarget& target) {
            MotorAngles goal = joint_to_motor({target.q_circ, target.q_abd}, arm);
            auto torque = [&](double goal_a, double ref, double a) {
                return std::clamp(cfg.sim.arm_gain * (goal_a + ref - a), -arm.motor_torque_max,
                                  arm.motor_torque_max);
            };
            MotorTorques m{torque(goal.alpha1, st.motor_ref1, st.alpha1),
                           torque(goal.alpha2, st.motor_ref2, st.alpha2)};
            double w = torso.m_arm * g * torso.l_arm;
            JointTorques load{-w * std::sin(rec.waist + st.q_circ), -w * std::sin(st.q_abd)};
            auto r = step_dynamics(st, m, load, dt, arm);
            st = r.state;
            return static_cast<int>(r.slips.size());
        };
        rec.slip_events = drive_arm(left, cmd.left) + drive_arm(right, cmd.right);
        log.records.push_back(std::move(rec));
    }
    return log;
}

// ------------------------------------------------------------------ writers

inline constexpr std::string_view kCommandLogHeader =
    "t_s,mode,turret_rate,waist_target,q_circ_L,q_abd_L,q_circ_R,q_abd_R,face_tag,clamped";

inline std::string format_command_log(const RunLog& log) {
    std::string out(kCommandLogHeader);
    out += '\n';
    for (const auto& r : log.records) {
        const CommandFrame& c = r.command;
        out += text::fmt_ms(r.t_ms) + ',' + to_string(r.mode) + ',' + text::fmt9(c.turret_rate) +
               ',' + text::fmt9(c.waist_target) + ',' + text::fmt9(c.left.q_circ) + ',' +
               text::fmt9(c.left.q_abd) + ',' + text::fmt9(c.right.q_circ) + ',' +
               text::fmt9(c.right.q_abd) + ',' + c.face + ',' + (c.clamped ? "1" : "0") + '\n';
    }
    return out;
}

inline std::string format_state_log(const RunLog& log) {
    std::string out;
    out += "# scenario=" + log.scenario + "\n";
    out += "# config_hash=" + text::hex64(log.config_hash) + "\n";
    out += "# seed=" + std::to_string(log.seed) + "\n";
    out += "# dt_s=" + text::fmt_ms(log.dt_ms) + "\n";
    out += "t_s,x_m,y_m,phi_rad,theta_t_rad,waist_rad,waist_rate,tau_holding_Nm,"
           "tau_inertial_Nm,tau_damper_Nm,tau_total_Nm,q_circ_L,q_abd_L,q_circ_R,q_abd_R,"
           "slip_events,engaged\n";
    for (const auto& r : log.records) {
        std::string row = text::fmt_ms(r.t_ms);
        for (double v : {r.base.x, r.base.y, r.base.phi, r.base.theta_t, r.waist, r.waist_rate,
                         r.torque.holding, r.torque.inertial, r.torque.damper, r.torque.total(),
                         r.left.q_circ, r.left.q_abd, r.right.q_circ, r.right.q_abd})
            row += ',' + text::fmt9(v);
        row += ',' + std::to_string(r.slip_events) + ',' +
               (r.engaged ? std::to_string(*r.engaged) : std::string());
        out += row + '\n';
    }
    return out;
}

// ------------------------------------------------------------------- report

struct RunReport {
    std::string scenario;
    std::uint64_t config_hash = 0;
    double duration = 0.0;
    int greets = 0;
    int bows = 0;
    int dances = 0;
    int clamped_commands = 0;
    int slip_events = 0;
    double max_waist_torque = 0.0;
    double waist_torque_bound = 0.0;
    double max_turret_rate = 0.0;
    double turret_rate_bound = 0.0;
    double max_abduction_target = 0.0;
    double abduction_bound = 0.0;
    double distance_traveled = 0.0;  // m, turret axis path length
    double turret_rotation = 0.0;    // rad, accumulated |torso heading change|
    std::map<std::string, double> time_in_mode;  // s
    std::vector<std::string> breaches;
};

// Re-checks every logged step against the config limits. A clean run has
// no breaches; anything listed means a command escaped clamping.
inline RunReport emit_report(const RunLog& log) {
    const PlatformConfig& cfg = log.config;
    RunReport rep;
    rep.scenario = log.scenario;
    rep.config_hash = log.config_hash;
    rep.waist_torque_bound = cfg.waist.torque_bound;
    rep.turret_rate_bound = cfg.base.max_turret_rate;
    rep.abduction_bound = cfg.arm.abduction_limit;
    if (!log.records.empty())
        rep.duration = (log.records.back().t_ms - log.records.front().t_ms) / 1000.0;

    std::optional<Mode> prev;
    std::optional<StepRecord> last;
    auto breach = [&](long long t_ms, const std::string& what) {
        rep.breaches.push_back("t=" + text::fmt_ms(t_ms) + " " + what);
    };
    for (const auto& r : log.records) {
        if (r.mode != prev) {
            rep.greets += r.mode == Mode::Greet;
            rep.bows += r.mode == Mode::Bow;
            rep.dances += r.mode == Mode::AttractDance;
        }
        prev = r.mode;
        rep.time_in_mode[to_string(r.mode)] += log.dt_ms / 1000.0;
        rep.clamped_commands += r.command.clamped;
        rep.slip_events += r.slip_events;

        double tau = std::abs(r.torque.total());
        rep.max_waist_torque = std::max(rep.max_waist_torque, tau);
        rep.max_turret_rate = std::max(rep.max_turret_rate, std::abs(r.command.turret_rate));
        for (const ArmTarget& a : {r.command.left, r.command.right})
            rep.max_abduction_target = std::max(rep.max_abduction_target, std::abs(a.q_abd));

        if (tau > cfg.waist.torque_bound)
            breach(r.t_ms, "waist torque " + text::fmt9(tau) + " > " +
                               text::fmt9(cfg.waist.torque_bound));
        if (std::abs(r.command.turret_rate) > cfg.base.max_turret_rate)
            breach(r.t_ms, "turret_rate " + text::fmt9(r.command.turret_rate) + " beyond " +
                               text::fmt9(cfg.base.max_turret_rate));
        auto rates = check_limits(r.rates, cfg.base);
        if (!rates.empty()) breach(r.t_ms, describe(rates));
        if (!cfg.waist.limits.contains(r.command.waist_target))
            breach(r.t_ms, "waist_target " + text::fmt9(r.command.waist_target) + " outside limits");
        if (!cfg.waist.limits.contains(r.waist))
            breach(r.t_ms, "waist angle " + text::fmt9(r.waist) + " outside limits");
        for (const ArmTarget& a : {r.command.left, r.command.right})
            if (std::abs(a.q_abd) > cfg.arm.abduction_limit)
                breach(r.t_ms, "abduction target " + text::fmt9(a.q_abd) + " beyond limit");

        if (last) {
            Vec2 p0 = detail::turret_position(last->base, cfg.base);
            Vec2 p1 = detail::turret_position(r.base, cfg.base);
            rep.distance_traveled += std::hypot(p1.x - p0.x, p1.y - p0.y);
            rep.turret_rotation +=
                std::abs(normalize_angle(r.base.torso_heading() - last->base.torso_heading()));
        }
        last = r;
    }
    return rep;
}

inline std::string format_report_text(const RunReport& r) {
    auto line = [](const std::string& k, const std::string& v) { return k + ": " + v + "\n"; };
    std::string out;
    out += line("scenario", r.scenario);
    out += line("config_hash", text::hex64(r.config_hash));
    out += line("duration_s", text::fmt9(r.duration));
    out += line("greets", std::to_string(r.greets));
    out += line("bows", std::to_string(r.bows));
    out += line("dances", std::to_string(r.dances));
    out += line("clamped_commands", std::to_string(r.clamped_commands));
    out += line("arm_slip_events", std::to_string(r.slip_events));
    out += line("max_waist_torque_Nm",
                text::fmt9(r.max_waist_torque) + " (bound " + text::fmt9(r.waist_torque_bound) + ")");
    out += line("max_turret_rate_rad_s",
                text::fmt9(r.max_turret_rate) + " (bound " + text::fmt9(r.turret_rate_bound) + ")");
    out += line("max_abduction_target_deg", text::fmt9(rad2deg(r.max_abduction_target)) +
                                                " (bound " + text::fmt9(rad2deg(r.abduction_bound)) +
                                                ")");
    out += line("distance_traveled_m", text::fmt9(r.distance_traveled));
    out += line("turret_rotation_rad", text::fmt9(r.turret_rotation));
    for (const auto& [mode, s] : r.time_in_mode) out += line("time_in_" + mode + "_s", text::fmt9(s));
    out += line("limit_breaches", std::to_string(r.breaches.size()));
    for (const auto& b : r.breaches) out += "  BREACH " + b + "\n";
    return out;
}

inline std::string format_report_csv(const RunReport& r) {
    std::string out = "metric,value\n";
    auto row = [&](const std::string& k, const std::string& v) { out += k + ',' + v + '\n'; };
    row("greets", std::to_string(r.greets));
    row("bows", std::to_string(r.bows));
    row("dances", std::to_string(r.dances));
    row("clamped_commands", std::to_string(r.clamped_commands));
    row("arm_slip_events", std::to_string(r.slip_events));
    row("max_waist_torque_Nm", text::fmt9(r.max_waist_torque));
    row("waist_torque_bound_Nm", text::fmt9(r.waist_torque_bound));
    row("max_turret_rate_rad_s", text::fmt9(r.max_turret_rate));
    row("turret_rate_bound_rad_s", text::fmt9(r.turret_rate_bound));
    row("distance_traveled_m", text::fmt9(r.distance_traveled));
    row("limit_breaches", std::to_string(r.breaches.size()));
    return out;
}

// Write to a sibling temp file and rename, so readers never see half a log.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw validation_error("cannot write " + tmp.string(), "out");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw validation_error("write failed for " + tmp.string(), "out");
    }
    std::filesystem::rename(tmp, path);
}

inline void write_run(const RunLog& log, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    RunReport rep = emit_report(log);
    write_file_atomic(dir / "commands.csv", format_command_log(log));
    write_file_atomic(dir / "state.csv", format_state_log(log));
    write_file_atomic(dir / "report.txt", format_report_text(rep));
    write_file_atomic(dir / "report.csv", format_report_csv(rep));
}

}  // namespace quori
