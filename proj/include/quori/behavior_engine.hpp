#pragma once

// Interaction state machine for the museum installation: greet visitors
// who walk into view, bow, then stay with the closest visitor (turret
// tracking and arm mirroring). Dance to attract people standing outside
// the view. With nobody in view for `sleep_timeout`, return to a sleep
// pose. Actions carry cool-downs so the robot does not repeat itself.
//
//   Sleep --visitor enters view--> Greet --greet_duration--> Bow
//   Bow --bow_duration--> MirrorTrack (nearest visitor; holds when lost)
//   any free mode --nobody in view for sleep_timeout--> Sleep
//   Sleep/MirrorTrack --visitors nearby, none in view, dance ready--> AttractDance
//
// Greet and Bow run to completion; visitors arriving meanwhile are queued
// and greeted afterwards if their cool-down allows. The engine is a pure
// function of (state, frame); identical inputs give identical outputs.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "angles.hpp"
#include "errors.hpp"
#include "platform_config.hpp"
#include "sensor_geometry.hpp"

namespace quori {

enum class Mode { Sleep, Greet, AttractDance, Bow, MirrorTrack };

inline const char* to_string(Mode m) {
    switch (m) {
        case Mode::Sleep: return "Sleep";
        case Mode::Greet: return "Greet";
        case Mode::AttractDance: return "AttractDance";
        case Mode::Bow: return "Bow";
        case Mode::MirrorTrack: return "MirrorTrack";
    }
    return "?";
}

inline bool engages(Mode m) { return m == Mode::Greet || m == Mode::Bow || m == Mode::MirrorTrack; }

struct VisitorArmPose {
    double flexion = 0.0;    // rad, sagittal swing
    double abduction = 0.0;  // rad, raised away from the body
};

struct VisitorObservation {
    int id = 0;
    Vec2 position;           // torso frame, m
    VisitorArmPose left_arm;
    VisitorArmPose right_arm;
    bool in_camera_fov = false;

    double range() const { return std::hypot(position.x, position.y); }
};

struct PerceptionFrame {
    double timestamp = 0.0;  // s
    std::vector<VisitorObservation> visitors;
    double torso_heading = 0.0;  // rad, world frame; used to recenter when asleep
};

struct BehaviorState {
    Mode mode = Mode::Sleep;
    std::optional<int> engaged;
    std::map<std::string, double> cooldowns;  // action -> expiry time
    double last_seen = -std::numeric_limits<double>::infinity();
    double mode_since = 0.0;
    std::optional<double> last_time;
    std::set<int> prev_visible;
    std::set<int> pending_greet;
    std::optional<Vec2> last_target;

    bool operator==(const BehaviorState&) const = default;
};

struct ArmTarget {
    double q_circ = 0.0;
    double q_abd = 0.0;
    bool operator==(const ArmTarget&) const = default;
};

struct CommandFrame {
    double turret_rate = 0.0;   // rad/s
    double waist_target = 0.0;  // rad
    ArmTarget left;
    ArmTarget right;
    std::string face = "loading";
    bool clamped = false;
    double base_ux = 0.0;       // torso-frame translation, free-roam only
    double base_uy = 0.0;
};

// Timing comparisons tolerate clock round-off.
inline constexpr double kTimeEpsilon = 1e-9;

inline bool elapsed_at_least(double elapsed, double duration) {
    return elapsed + kTimeEpsilon >= duration;
}

inline std::string greet_key(int id) { return "greet:" + std::to_string(id); }
inline const std::string kDanceKey = "dance";

inline bool cooldown_ready(const BehaviorState& s, const std::string& key, double t) {
    auto it = s.cooldowns.find(key);
    return it == s.cooldowns.end() || t + kTimeEpsilon >= it->second;
}

namespace detail {

inline bool closer(const VisitorObservation& a, const VisitorObservation& b) {
    double ra = a.range(), rb = b.range();
    if (ra != rb) return ra < rb;
    return a.id < b.id;
}

inline const VisitorObservation* find_visitor(const PerceptionFrame& f, int id) {
    for (const auto& v : f.visitors)
        if (v.id == id) return &v;
    return nullptr;
}

}  // namespace detail

// Closest visitor in view; ties go to the lower id.
inline std::optional<int> select_target(const PerceptionFrame& f) {
    const VisitorObservation* best = nullptr;
    for (const auto& v : f.visitors)
        if (v.in_camera_fov && (!best || detail::closer(v, *best))) best = &v;
    if (!best) return std::nullopt;
    return best->id;
}

struct MirrorTargets {
    ArmTarget left;
    ArmTarget right;
    bool clamped = false;
};

// The visitor's left arm drives the robot's right arm and vice versa, as a
// mirror image would.
inline MirrorTargets mirror_map(const VisitorArmPose& visitor_left,
                                const VisitorArmPose& visitor_right,
                                const TransmissionSpec& arm) {
    MirrorTargets m;
    auto map_one = [&](const VisitorArmPose& v) {
        double abd = std::clamp(v.abduction, -arm.abduction_limit, arm.abduction_limit);
        if (abd != v.abduction) m.clamped = true;
        return ArmTarget{v.flexion, abd};
    };
    m.right = map_one(visitor_left);
    m.left = map_one(visitor_right);
    return m;
}

// Proportional turret rate toward a torso-frame target, saturated at the
// turret limit and at the rate that would reach the target in one step.
inline double track_turret(const Vec2& target, double dt, const BehaviorParams& p,
                           double max_turret_rate) {
    double bearing = std::atan2(target.y, target.x);
    if (std::abs(bearing) <= p.turret_deadband) return 0.0;
    double limit = max_turret_rate;
    if (dt > 0.0) limit = std::min(limit, std::abs(bearing) / dt);
    return std::clamp(p.turret_gain * bearing, -limit, limit);
}

struct BehaviorStep {
    BehaviorState state;
    CommandFrame command;
};

namespace detail {

// Clamp every field into platform limits and flag any change.
inline void clamp_command(CommandFrame& c, const PlatformConfig& cfg) {
    auto clamp_flag = [&](double& v, double lo, double hi) {
        double before = v;
        v = std::clamp(v, lo, hi);
        if (v != before) c.clamped = true;
    };
    clamp_flag(c.turret_rate, -cfg.base.max_turret_rate, cfg.base.max_turret_rate);
    clamp_flag(c.waist_target, -cfg.waist.limits.back, cfg.waist.limits.forward);
    for (ArmTarget* a : {&c.left, &c.right})
        clamp_flag(a->q_abd, -cfg.arm.abduction_limit, cfg.arm.abduction_limit);
    double speed = std::hypot(c.base_ux, c.base_uy);
    if (speed > cfg.base.max_linear_speed) {
        double k = cfg.base.max_linear_speed / speed;
        c.base_ux *= k;
        c.base_uy *= k;
        c.clamped = true;
    }
}

}  // namespace detail

inline BehaviorStep step(BehaviorState s, const PerceptionFrame& f, double dt,
                         const PlatformConfig& cfg) {
    const double t = f.timestamp;
    if (s.last_time && !(t > *s.last_time))
        throw validation_error("perception timestamps must strictly increase", "timestamp");
    {
        std::set<int> ids;
        for (const auto& v : f.visitors)
            if (!ids.insert(v.id).second)
                throw validation_error("duplicate visitor id in frame", "visitor_id");
    }
    s.last_time = t;
    const BehaviorParams& p = cfg.behavior;

    std::set<int> visible;
    for (const auto& v : f.visitors)
        if (v.in_camera_fov) visible.insert(v.id);
    if (!visible.empty()) s.last_seen = t;

    for (int id : visible)
        if (!s.prev_visible.count(id) && cooldown_ready(s, greet_key(id), t))
            s.pending_greet.insert(id);
    std::erase_if(s.pending_greet, [&](int id) { return !visible.count(id); });
    s.prev_visible = visible;

    auto enter = [&](Mode m, std::optional<int> who) {
        s.mode = m;
        s.engaged = engages(m) ? who : std::nullopt;
        s.mode_since = t;
    };

    // Modes that run to completion.
    bool committed = false;
    double elapsed = t - s.mode_since;
    if (s.mode == Mode::Greet) {
        if (!elapsed_at_least(elapsed, p.greet_duration))
            committed = true;
        else {
            enter(Mode::Bow, s.engaged);
            committed = true;
        }
    } else if (s.mode == Mode::Bow && !elapsed_at_least(elapsed, p.bow_duration)) {
        committed = true;
    }

    if (!committed) {
        if (!s.pending_greet.empty()) {
            const VisitorObservation* who = nullptr;
            for (int id : s.pending_greet) {
                const auto* v = detail::find_visitor(f, id);
                if (v && (!who || detail::closer(*v, *who))) who = v;
            }
            s.pending_greet.erase(who->id);
            s.cooldowns[greet_key(who->id)] = t + p.greet_cooldown;
            enter(Mode::Greet, who->id);
        } else if (!visible.empty()) {
            auto target = select_target(f);
            bool dancing = s.mode == Mode::AttractDance &&
                           !elapsed_at_least(t - s.mode_since, p.dance_duration);
            if (!dancing && (s.mode != Mode::MirrorTrack || s.engaged != target))
                enter(Mode::MirrorTrack, target);
        } else {
            bool recently_seen = t - s.last_seen + kTimeEpsilon < p.sleep_timeout;
            bool dancing = s.mode == Mode::AttractDance &&
                           !elapsed_at_least(t - s.mode_since, p.dance_duration);
            if (dancing) {
                // keep dancing
            } else if (recently_seen && (s.mode == Mode::MirrorTrack || s.mode == Mode::Bow)) {
                if (s.mode == Mode::Bow) enter(Mode::MirrorTrack, s.engaged);
            } else if (!f.visitors.empty() && cooldown_ready(s, kDanceKey, t)) {
                s.cooldowns[kDanceKey] = t + p.dance_cooldown;
                enter(Mode::AttractDance, std::nullopt);
            } else if (s.mode != Mode::Sleep) {
                enter(Mode::Sleep, std::nullopt);
            }
        }
    }

    // ---- commands for the resulting mode
    CommandFrame c;
    const double in_mode = t - s.mode_since;
    const VisitorObservation* engaged =
        s.engaged ? detail::find_visitor(f, *s.engaged) : nullptr;
    if (engaged) s.last_target = engaged->position;
    auto track_engaged = [&] {
        return engaged ? track_turret(engaged->position, dt, p, cfg.base.max_turret_rate) : 0.0;
    };

    switch (s.mode) {
        case Mode::Sleep: {
            double back_to_center = normalize_angle(-f.torso_heading);
            c.turret_rate = track_turret({std::cos(back_to_center), std::sin(back_to_center)}, dt,
                                         p, cfg.base.max_turret_rate);
            c.waist_target = 0.0;
            c.face = "loading";
            break;
        }
        case Mode::Greet:
            c.turret_rate = track_engaged();
            c.right = {p.wave_amplitude * std::sin(two_pi * p.wave_frequency * in_mode),
                       p.wave_abduction};
            c.face = "wave";
            break;
        case Mode::Bow:
            c.turret_rate = track_engaged();
            c.waist_target = p.bow_angle;
            c.face = "smile";
            break;
        case Mode::AttractDance: {
            double phase = pi * in_mode;
            c.turret_rate = p.dance_rate * std::sin(phase);
            c.waist_target = 0.5 * p.bow_angle * std::abs(std::sin(phase));
            double lift = 0.5 * cfg.arm.abduction_limit * std::abs(std::sin(phase));
            c.left = {0.0, lift};
            c.right = {0.0, lift};
            c.face = "excited";
            break;
        }
        case Mode::MirrorTrack: {
            c.turret_rate = track_engaged();
            c.face = "attentive";
            if (engaged && engaged->in_camera_fov) {
                auto m = mirror_map(engaged->left_arm, engaged->right_arm, cfg.arm);
                c.left = m.left;
                c.right = m.right;
                c.clamped = m.clamped;
            }
            if (p.free_roam && engaged) {
                double r = engaged->range();
                if (r > 0.0) {
                    double speed = p.follow_gain * (r - p.follow_distance);
                    c.base_ux = speed * engaged->position.x / r;
                    c.base_uy = speed * engaged->position.y / r;
                }
            }
            break;
        }
    }
    detail::clamp_command(c, cfg);
    return {std::move(s), std::move(c)};
}

}  // namespace quori
