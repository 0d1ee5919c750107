#pragma once

// Platform parameters, rollups (mass, bill of materials, power) and the
// flat `key = value` configuration format.
//
// Config format: UTF-8, one `key = value` per line, `#` starts a comment,
// blank lines ignored. Unknown keys are an error. Angles are given in
// degrees in keys ending in `_deg` and held in radians in memory. Keys under
// `mass.` form an open module -> kg table; `mass.arm` counts twice.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "angles.hpp"
#include "arm_transmission.hpp"
#include "base_kinematics.hpp"
#include "errors.hpp"
#include "head_projection.hpp"
#include "sensor_geometry.hpp"
#include "text.hpp"
#include "waist_counterbalance.hpp"

namespace quori {

struct BatterySpec {
    double voltage = 12.0;       // V
    double capacity_ah = 40.0;   // A·h
    std::string chemistry = "SLA-AGM";

    double energy_wh() const { return voltage * capacity_ah; }
    bool operator==(const BatterySpec&) const = default;
};

// Interaction timing and gesture shapes for the behavior engine.
struct BehaviorParams {
    double greet_duration = 3.0;          // s of waving
    double greet_cooldown = 30.0;         // s, per visitor
    double bow_duration = 2.0;            // s
    double dance_duration = 4.0;          // s
    double dance_cooldown = 60.0;         // s
    double sleep_timeout = 20.0;          // s without anyone in view
    double turret_deadband = deg2rad(2.0);
    double turret_gain = 2.0;             // 1/s
    double bow_angle = deg2rad(20.0);
    double wave_abduction = deg2rad(60.0);
    double wave_amplitude = deg2rad(30.0);
    double wave_frequency = 1.0;          // Hz
    double dance_rate = 1.0;              // rad/s turret sway
    double visitor_height = 1.2;          // m, point tested against the camera view
    double perception_range = 5.0;        // m
    bool free_roam = false;               // museum mode commands the turret only
    double follow_distance = 1.2;         // m, free-roam standoff
    double follow_gain = 0.8;             // 1/s

    bool operator==(const BehaviorParams&) const = default;
};

struct SimParams {
    double dt = 0.01;            // s
    double waist_gain = 2.0;     // 1/s, waist rate command per rad of error
    double arm_gain = 0.05;      // N·m per motor rad of error

    bool operator==(const SimParams&) const = default;
};

struct PlatformConfig {
    BaseGeometry base;
    TransmissionSpec arm;
    WaistConfig waist;
    double head_radius = 0.1;
    SphereMapCalibration head;
    std::string head_profile_file;
    ProjectorSpec projector;
    std::map<std::string, double> mass_table = {
        {"base", 9.8}, {"arm", 2.1}, {"waist_torso", 29.5}, {"head", 2.0}};
    BatterySpec battery;
    CameraMount camera;
    LaserMount laser;
    SpeakerSpec speaker;
    BehaviorParams behavior;
    SimParams sim;

    bool operator==(const PlatformConfig&) const = default;
};

// ------------------------------------------------------------- rollups

// Sum of module masses; "arm" is per arm and counts twice.
inline double mass_total(const std::map<std::string, double>& table) {
    double total = 0.0;
    for (const auto& [name, kg] : table) total += name == "arm" ? 2.0 * kg : kg;
    return total;
}

inline double mass_total(const PlatformConfig& c) { return mass_total(c.mass_table); }

// Runtime on a full charge at a constant draw.
inline double power_runtime(const BatterySpec& b, double draw_w) {
    if (!(draw_w > 0.0)) throw validation_error("power draw must be > 0 W", "draw");
    return b.energy_wh() / draw_w;
}

// The e-stop cuts the motor bus only; computer and projector stay up.
struct PowerState {
    bool estop_engaged = false;
    bool motor_bus_on = true;
    bool compute_bus_on = true;
    bool projector_on = true;

    bool operator==(const PowerState&) const = default;
};

inline PowerState apply_estop(PowerState s, bool engaged) {
    s.estop_engaged = engaged;
    if (engaged) s.motor_bus_on = false;
    return s;
}

inline bool motor_bus_restorable(const PowerState& s) { return !s.estop_engaged; }

inline PowerState restore_motor_bus(PowerState s) {
    if (s.estop_engaged) throw validation_error("e-stop engaged", "estop");
    s.motor_bus_on = true;
    return s;
}

// --------------------------------------------------------------- BOM

// Money is held in integer cents.
struct BomLine {
    std::string subsystem;
    std::string item;
    long long qty = 0;
    long long unit_cost_cents = 0;
    long long subtotal_cents = 0;
};

struct BomTable {
    std::vector<BomLine> lines;
};

inline constexpr std::string_view kBomHeader = "subsystem,item,qty,unit_cost_usd,subtotal_usd";

inline std::optional<long long> parse_cents(std::string_view s) {
    s = text::trim(s);
    bool neg = !s.empty() && s.front() == '-';
    if (neg) s.remove_prefix(1);
    auto dot = s.find('.');
    auto whole = text::parse_int(s.substr(0, dot));
    if (!whole || s.substr(0, dot).find_first_not_of("0123456789") != std::string_view::npos)
        return std::nullopt;
    long long cents = *whole * 100;
    if (dot != std::string_view::npos) {
        auto frac = s.substr(dot + 1);
        if (frac.empty() || frac.size() > 2 ||
            frac.find_first_not_of("0123456789") != std::string_view::npos)
            return std::nullopt;
        long long f = *text::parse_int(frac);
        cents += frac.size() == 1 ? f * 10 : f;
    }
    return neg ? -cents : cents;
}

inline std::string format_cents(long long cents) {
    std::string sign = cents < 0 ? "-" : "";
    if (cents < 0) cents = -cents;
    std::string out = sign + std::to_string(cents / 100);
    if (cents % 100) {
        char buf[8];
        std::snprintf(buf, sizeof buf, ".%02lld", cents % 100);
        out += buf;
    }
    return out;
}

inline BomTable parse_bom_csv(std::string_view doc) {
    BomTable t;
    int lineno = 0;
    bool header_seen = false;
    for (auto raw : text::split_lines(doc)) {
        ++lineno;
        auto line = text::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            if (line != kBomHeader)
                throw parse_error("expected header '" + std::string(kBomHeader) + "'", lineno);
            header_seen = true;
            continue;
        }
        auto f = text::split_csv(line);
        if (f.size() != 5) throw parse_error("expected 5 columns, got " + std::to_string(f.size()), lineno);
        auto qty = text::parse_int(f[2]);
        auto unit = parse_cents(f[3]);
        auto sub = parse_cents(f[4]);
        if (!qty || !unit || !sub) throw parse_error("non-numeric quantity or cost", lineno);
        if (*qty < 0 || *unit < 0 || *sub < 0)
            throw validation_error("line " + std::to_string(lineno) + ": negative BOM entry", "bom");
        t.lines.push_back({std::string(f[0]), std::string(f[1]), *qty, *unit, *sub});
    }
    if (!header_seen) throw parse_error("missing BOM header", 0);
    return t;
}

// Sum of the printed subtotals, in cents.
inline long long bom_total(const BomTable& t) {
    long long total = 0;
    for (const auto& l : t.lines) {
        if (l.qty < 0 || l.unit_cost_cents < 0 || l.subtotal_cents < 0)
            throw validation_error("negative BOM entry: " + l.item, "bom");
        total += l.subtotal_cents;
    }
    return total;
}

struct BomIssue {
    size_t index = 0;            // line index in the table
    long long expected_cents = 0;  // qty x unit cost
    long long printed_cents = 0;
    bool rounding = false;       // within $1, as printed tables round
};

// Lines whose subtotal is not qty x unit cost.
inline std::vector<BomIssue> bom_check(const BomTable& t, long long rounding_cents = 100) {
    std::vector<BomIssue> issues;
    for (size_t i = 0; i < t.lines.size(); ++i) {
        const auto& l = t.lines[i];
        long long expected = l.qty * l.unit_cost_cents;
        if (expected != l.subtotal_cents) {
            long long diff = expected - l.subtotal_cents;
            issues.push_back({i, expected, l.subtotal_cents, std::abs(diff) <= rounding_cents});
        }
    }
    return issues;
}

// ------------------------------------------------------------ config I/O

namespace detail {

struct ConfigField {
    std::string key;
    std::function<void(PlatformConfig&, std::string_view, int)> set;
    std::function<std::string(const PlatformConfig&)> get;
};

inline double identity(double v) { return v; }

template <class Access>
ConfigField number_field(std::string key, Access acc, double (*to_internal)(double) = identity,
                         double (*to_external)(double) = identity) {
    return {key,
            [acc, to_internal, key](PlatformConfig& c, std::string_view v, int line) {
                auto d = text::parse_double(v);
                if (!d || !std::isfinite(*d))
                    throw parse_error("'" + key + "' expects a number, got '" + std::string(v) + "'",
                                      line);
                acc(c) = to_internal(*d);
            },
            [acc, to_internal, to_external](const PlatformConfig& c) {
                double stored = acc(const_cast<PlatformConfig&>(c));
                return text::fmt_roundtrip(stored, to_external(stored), to_internal);
            }};
}

template <class Access>
ConfigField angle_field(std::string key, Access acc) {
    return number_field(std::move(key), acc, [](double d) { return deg2rad(d); },
                        [](double r) { return rad2deg(r); });
}

template <class Access>
ConfigField int_field(std::string key, Access acc) {
    return {key,
            [acc, key](PlatformConfig& c, std::string_view v, int line) {
                auto d = text::parse_int(v);
                if (!d) throw parse_error("'" + key + "' expects an integer", line);
                acc(c) = static_cast<int>(*d);
            },
            [acc](const PlatformConfig& c) {
                return std::to_string(acc(const_cast<PlatformConfig&>(c)));
            }};
}

template <class Access>
ConfigField bool_field(std::string key, Access acc) {
    return {key,
            [acc, key](PlatformConfig& c, std::string_view v, int line) {
                if (v == "true")
                    acc(c) = true;
                else if (v == "false")
                    acc(c) = false;
                else
                    throw parse_error("'" + key + "' expects true or false", line);
            },
            [acc](const PlatformConfig& c) {
                return acc(const_cast<PlatformConfig&>(c)) ? std::string("true")
                                                           : std::string("false");
            }};
}

template <class Access>
ConfigField string_field(std::string key, Access acc) {
    return {key,
            [acc](PlatformConfig& c, std::string_view v, int) { acc(c) = std::string(v); },
            [acc](const PlatformConfig& c) { return acc(const_cast<PlatformConfig&>(c)); }};
}

#define QUORI_FIELD(expr) [](PlatformConfig& c) -> auto& { return c.expr; }

inline const std::vector<ConfigField>& config_schema() {
    static const std::vector<ConfigField> schema = [] {
        std::vector<ConfigField> f;
        f.push_back(number_field("base.diameter", QUORI_FIELD(base.diameter)));
        f.push_back(number_field("base.wheel_radius", QUORI_FIELD(base.wheel_radius)));
        f.push_back(number_field("base.half_track", QUORI_FIELD(base.half_track)));
        f.push_back(number_field("base.turret_offset", QUORI_FIELD(base.turret_offset)));
        f.push_back(number_field("base.max_linear_speed", QUORI_FIELD(base.max_linear_speed)));
        f.push_back(number_field("base.max_turret_rate", QUORI_FIELD(base.max_turret_rate)));

        f.push_back(number_field("arm.gear_ratio", QUORI_FIELD(arm.ratio)));
        f.push_back(number_field("arm.clutch_torque", QUORI_FIELD(arm.clutch_torque)));
        f.push_back(number_field("arm.motor_torque_max", QUORI_FIELD(arm.motor_torque_max)));
        f.push_back(number_field("arm.motor_speed_max_rps", QUORI_FIELD(arm.motor_speed_max)));
        f.push_back(angle_field("arm.abduction_limit_deg", QUORI_FIELD(arm.abduction_limit)));
        f.push_back(angle_field("arm.output_encoder_res_deg", QUORI_FIELD(arm.output_encoder_res)));
        f.push_back(angle_field("arm.motor_encoder_res_deg", QUORI_FIELD(arm.motor_encoder_res)));
        f.push_back(number_field("arm.output_damping", QUORI_FIELD(arm.output_damping)));
        f.push_back(number_field("arm.slip_threshold_factor", QUORI_FIELD(arm.slip_threshold_factor)));
        f.push_back(int_field("arm.slip_ring_wires", QUORI_FIELD(arm.slip_ring_wires)));
        f.push_back(number_field("arm.slip_ring_current", QUORI_FIELD(arm.slip_ring_current)));
        f.push_back(int_field("arm.addon_wires", QUORI_FIELD(arm.addon_wires)));
        f.push_back(number_field("arm.addon_current", QUORI_FIELD(arm.addon_current)));

        f.push_back(angle_field("waist.forward_limit_deg", QUORI_FIELD(waist.limits.forward)));
        f.push_back(angle_field("waist.back_limit_deg", QUORI_FIELD(waist.limits.back)));
        f.push_back(number_field("waist.max_rate", QUORI_FIELD(waist.limits.max_rate)));
        f.push_back(number_field("waist.max_accel", QUORI_FIELD(waist.limits.max_accel)));
        f.push_back(number_field("waist.m_upper", QUORI_FIELD(waist.m_upper)));
        f.push_back(number_field("waist.l_upper", QUORI_FIELD(waist.l_upper)));
        f.push_back(number_field("waist.m_arm", QUORI_FIELD(waist.m_arm)));
        f.push_back(number_field("waist.l_shoulder", QUORI_FIELD(waist.l_shoulder)));
        f.push_back(number_field("waist.l_arm", QUORI_FIELD(waist.l_arm)));
        f.push_back(number_field("waist.battery_mass", QUORI_FIELD(waist.battery_mass)));
        f.push_back(number_field("waist.counter_mass", QUORI_FIELD(waist.counter_mass)));
        f.push_back(number_field("waist.l_lower", QUORI_FIELD(waist.l_lower)));
        f.push_back(number_field("waist.i_extra", QUORI_FIELD(waist.i_extra)));
        f.push_back(number_field("waist.damper_torque", QUORI_FIELD(waist.damper_torque)));
        f.push_back(number_field("waist.gravity", QUORI_FIELD(waist.gravity)));
        f.push_back(number_field("waist.torque_bound", QUORI_FIELD(waist.torque_bound)));

        f.push_back(number_field("head.radius", QUORI_FIELD(head_radius)));
        f.push_back(number_field("head.center_u", QUORI_FIELD(head.center_u)));
        f.push_back(number_field("head.center_v", QUORI_FIELD(head.center_v)));
        f.push_back(number_field("head.rho_min", QUORI_FIELD(head.rho_min)));
        f.push_back(number_field("head.rho_max", QUORI_FIELD(head.rho_max)));
        f.push_back(angle_field("head.theta_top_deg", QUORI_FIELD(head.theta_top)));
        f.push_back(angle_field("head.theta_max_deg", QUORI_FIELD(head.theta_max)));
        f.push_back(string_field("head.profile_file", QUORI_FIELD(head_profile_file)));

        f.push_back(number_field("projector.rated_lumens", QUORI_FIELD(projector.rated_lumens)));
        f.push_back(number_field("projector.lifetime_hours", QUORI_FIELD(projector.lifetime_hours)));
        f.push_back(int_field("projector.width", QUORI_FIELD(projector.width)));
        f.push_back(int_field("projector.height", QUORI_FIELD(projector.height)));

        f.push_back(number_field("battery.voltage", QUORI_FIELD(battery.voltage)));
        f.push_back(number_field("battery.capacity_ah", QUORI_FIELD(battery.capacity_ah)));
        f.push_back(string_field("battery.chemistry", QUORI_FIELD(battery.chemistry)));

        f.push_back(angle_field("camera.h_fov_deg", QUORI_FIELD(camera.h_fov)));
        f.push_back(angle_field("camera.v_fov_deg", QUORI_FIELD(camera.v_fov)));
        f.push_back(angle_field("camera.tilt_deg", QUORI_FIELD(camera.manual_tilt)));
        f.push_back(angle_field("camera.tilt_limit_deg", QUORI_FIELD(camera.tilt_limit)));
        f.push_back(number_field("camera.mount_height", QUORI_FIELD(camera.mount_height)));
        f.push_back(number_field("camera.footprint_range", QUORI_FIELD(camera.footprint_range)));

        f.push_back(number_field("laser.range", QUORI_FIELD(laser.range_max)));
        f.push_back(number_field("laser.offset", QUORI_FIELD(laser.mount_offset)));
        f.push_back(angle_field("laser.heading_deg", QUORI_FIELD(laser.heading)));
        f.push_back(angle_field("laser.fov_deg", QUORI_FIELD(laser.intrinsic_fov)));
        f.push_back({"laser.occluders",
                     [](PlatformConfig& c, std::string_view v, int line) {
                         try {
                             c.laser.occluders = parse_occluders(v);
                         } catch (const validation_error& e) {
                             throw parse_error(e.what(), line);
                         }
                     },
                     [](const PlatformConfig& c) { return format_occluders(c.laser.occluders); }});

        f.push_back(number_field("speaker.reference_spl", QUORI_FIELD(speaker.reference_spl)));
        f.push_back(number_field("speaker.reference_distance", QUORI_FIELD(speaker.reference_distance)));

        f.push_back(number_field("behavior.greet_duration", QUORI_FIELD(behavior.greet_duration)));
        f.push_back(number_field("behavior.greet_cooldown", QUORI_FIELD(behavior.greet_cooldown)));
        f.push_back(number_field("behavior.bow_duration", QUORI_FIELD(behavior.bow_duration)));
        f.push_back(number_field("behavior.dance_duration", QUORI_FIELD(behavior.dance_duration)));
        f.push_back(number_field("behavior.dance_cooldown", QUORI_FIELD(behavior.dance_cooldown)));
        f.push_back(number_field("behavior.sleep_timeout", QUORI_FIELD(behavior.sleep_timeout)));
        f.push_back(angle_field("behavior.turret_deadband_deg", QUORI_FIELD(behavior.turret_deadband)));
        f.push_back(number_field("behavior.turret_gain", QUORI_FIELD(behavior.turret_gain)));
        f.push_back(angle_field("behavior.bow_angle_deg", QUORI_FIELD(behavior.bow_angle)));
        f.push_back(angle_field("behavior.wave_abduction_deg", QUORI_FIELD(behavior.wave_abduction)));
        f.push_back(angle_field("behavior.wave_amplitude_deg", QUORI_FIELD(behavior.wave_amplitude)));
        f.push_back(number_field("behavior.wave_frequency", QUORI_FIELD(behavior.wave_frequency)));
        f.push_back(number_field("behavior.dance_rate", QUORI_FIELD(behavior.dance_rate)));
        f.push_back(number_field("behavior.visitor_height", QUORI_FIELD(behavior.visitor_height)));
        f.push_back(number_field("behavior.perception_range", QUORI_FIELD(behavior.perception_range)));
        f.push_back(bool_field("behavior.free_roam", QUORI_FIELD(behavior.free_roam)));
        f.push_back(number_field("behavior.follow_distance", QUORI_FIELD(behavior.follow_distance)));
        f.push_back(number_field("behavior.follow_gain", QUORI_FIELD(behavior.follow_gain)));

        f.push_back(number_field("sim.dt", QUORI_FIELD(sim.dt)));
        f.push_back(number_field("sim.waist_gain", QUORI_FIELD(sim.waist_gain)));
        f.push_back(number_field("sim.arm_gain", QUORI_FIELD(sim.arm_gain)));
        return f;
    }();
    return schema;
}

#undef QUORI_FIELD

inline void require_positive(double v, const char* key) {
    if (!(v > 0.0)) throw validation_error(std::string(key) + " must be > 0", key);
}

}  // namespace detail

// Keeps derived fields (head image size and radial profile) in step with
// the keyed parameters.
inline void sync_derived(PlatformConfig& c) {
    c.head.image_width = c.projector.width;
    c.head.image_height = c.projector.height;
    c.head.profile = RadialProfile::linear(c.head.theta_top, c.head.rho_max, c.head.theta_max,
                                           c.head.rho_min);
}

inline void validate(const PlatformConfig& c) {
    using detail::require_positive;
    require_positive(c.base.diameter, "base.diameter");
    require_positive(c.base.wheel_radius, "base.wheel_radius");
    require_positive(c.base.half_track, "base.half_track");
    require_positive(c.base.turret_offset, "base.turret_offset");
    require_positive(c.base.max_linear_speed, "base.max_linear_speed");
    require_positive(c.base.max_turret_rate, "base.max_turret_rate");
    if (c.base.half_track >= c.base.diameter / 2)
        throw validation_error("wheels must fit inside the base footprint", "base.half_track");
    validate(c.arm);

    const auto& w = c.waist;
    require_positive(w.limits.forward, "waist.forward_limit_deg");
    require_positive(w.limits.back, "waist.back_limit_deg");
    require_positive(w.limits.max_rate, "waist.max_rate");
    require_positive(w.limits.max_accel, "waist.max_accel");
    require_positive(w.gravity, "waist.gravity");
    require_positive(w.torque_bound, "waist.torque_bound");
    std::pair<double, const char*> nonneg[] = {
        {w.m_upper, "waist.m_upper"}, {w.l_upper, "waist.l_upper"}, {w.m_arm, "waist.m_arm"},
        {w.l_shoulder, "waist.l_shoulder"}, {w.l_arm, "waist.l_arm"},
        {w.battery_mass, "waist.battery_mass"}, {w.counter_mass, "waist.counter_mass"},
        {w.l_lower, "waist.l_lower"}, {w.i_extra, "waist.i_extra"},
        {w.damper_torque, "waist.damper_torque"}};
    for (auto [v, key] : nonneg)
        if (v < 0.0) throw validation_error(std::string(key) + " must be >= 0", key);

    require_positive(c.head_radius, "head.radius");
    validate(c.head);
    if (c.projector.rated_lumens < 0.0)
        throw validation_error("projector.rated_lumens must be >= 0", "projector.rated_lumens");
    require_positive(c.projector.lifetime_hours, "projector.lifetime_hours");

    for (const auto& [name, kg] : c.mass_table)
        if (kg < 0.0) throw validation_error("mass." + name + " must be >= 0", "mass." + name);
    require_positive(c.battery.voltage, "battery.voltage");
    require_positive(c.battery.capacity_ah, "battery.capacity_ah");

    validate(c.camera);
    validate(c.laser, c.base.diameter / 2);
    require_positive(c.speaker.reference_distance, "speaker.reference_distance");

    const auto& b = c.behavior;
    require_positive(b.greet_duration, "behavior.greet_duration");
    require_positive(b.bow_duration, "behavior.bow_duration");
    require_positive(b.dance_duration, "behavior.dance_duration");
    require_positive(b.sleep_timeout, "behavior.sleep_timeout");
    require_positive(b.turret_gain, "behavior.turret_gain");
    require_positive(b.perception_range, "behavior.perception_range");
    if (b.greet_cooldown < 0.0 || b.dance_cooldown < 0.0)
        throw validation_error("cooldowns must be >= 0", "behavior.greet_cooldown");
    if (b.turret_deadband < 0.0)
        throw validation_error("deadband must be >= 0", "behavior.turret_deadband_deg");
    if (!w.limits.contains(b.bow_angle))
        throw validation_error("bow angle outside waist limits", "behavior.bow_angle_deg");
    if (std::abs(b.wave_abduction) > c.arm.abduction_limit)
        throw validation_error("wave abduction beyond arm limit", "behavior.wave_abduction_deg");

    require_positive(c.sim.dt, "sim.dt");
    require_positive(c.sim.waist_gain, "sim.waist_gain");
    require_positive(c.sim.arm_gain, "sim.arm_gain");
}

inline PlatformConfig default_config() {
    PlatformConfig c;
    sync_derived(c);
    return c;
}

// Parses a config document over the defaults. Throws parse_error (with line)
// for syntax and unknown keys, validation_error (naming the key) for
// invariant violations.
inline PlatformConfig load_config(std::string_view doc) {
    PlatformConfig c;
    const auto& schema = detail::config_schema();
    std::map<std::string, int> seen;
    int lineno = 0;
    for (auto raw : text::split_lines(doc)) {
        ++lineno;
        auto hash = raw.find('#');
        auto line = text::trim(raw.substr(0, hash));
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string_view::npos) throw parse_error("expected 'key = value'", lineno);
        std::string key(text::trim(line.substr(0, eq)));
        auto value = text::trim(line.substr(eq + 1));
        if (key.empty()) throw parse_error("empty key", lineno);
        if (auto [it, fresh] = seen.emplace(key, lineno); !fresh)
            throw parse_error("duplicate key '" + key + "' (first on line " +
                                  std::to_string(it->second) + ")",
                              lineno);
        if (key.starts_with("mass.")) {
            std::string module = key.substr(5);
            auto kg = text::parse_double(value);
            if (module.empty()) throw parse_error("empty mass module name", lineno);
            if (!kg) throw parse_error("'" + key + "' expects a number", lineno);
            c.mass_table[module] = *kg;
            continue;
        }
        bool found = false;
        for (const auto& field : schema) {
            if (field.key == key) {
                field.set(c, value, lineno);
                found = true;
                break;
            }
        }
        if (!found) throw parse_error("unknown key '" + key + "'", lineno);
    }
    // An explicit mass table replaces the default one.
    bool any_mass = false;
    for (const auto& [k, line] : seen) any_mass |= k.starts_with("mass.");
    if (any_mass) {
        std::map<std::string, double> explicit_table;
        for (const auto& [k, line] : seen)
            if (k.starts_with("mass.")) explicit_table[k.substr(5)] = c.mass_table[k.substr(5)];
        c.mass_table = std::move(explicit_table);
    }
    sync_derived(c);
    validate(c);
    return c;
}

inline std::string serialize_config(const PlatformConfig& c) {
    std::string out;
    for (const auto& field : detail::config_schema())
        out += field.key + " = " + field.get(c) + "\n";
    for (const auto& [name, kg] : c.mass_table) out += "mass." + name + " = " + text::fmt_roundtrip(kg, kg, [](double v) { return v; }) + "\n";
    return out;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot open " + path, 0);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Loads a config file, plus its radial profile file when one is named.
// Relative profile paths resolve against the config file's directory.
inline PlatformConfig load_config_file(const std::string& path) {
    PlatformConfig c = load_config(read_text_file(path));
    if (!c.head_profile_file.empty()) {
        std::string p = c.head_profile_file;
        if (p.front() != '/') {
            auto slash = path.find_last_of('/');
            if (slash != std::string::npos) p = path.substr(0, slash + 1) + p;
        }
        c.head.profile = parse_radial_profile_csv(read_text_file(p));
        validate(c.head);
    }
    return c;
}

inline std::uint64_t config_hash(const PlatformConfig& c) {
    return text::fnv1a(serialize_config(c));
}

}  // namespace quori
