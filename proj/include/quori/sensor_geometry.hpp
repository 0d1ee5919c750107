#pragma once

// Field-of-view geometry for the head camera, the base laser scanner and
// the chest speaker. Robot frame: x forward, y left, z up, origin on the
// floor below the turret axis.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "angles.hpp"
#include "base_kinematics.hpp"
#include "errors.hpp"
#include "text.hpp"
#include "waist_counterbalance.hpp"

namespace quori {

struct Vec2 {
    double x = 0.0, y = 0.0;
    bool operator==(const Vec2&) const = default;
};

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

// ---------------------------------------------------------------- camera

struct CameraMount {
    double h_fov = deg2rad(60.0);
    double v_fov = deg2rad(49.5);
    double manual_tilt = 0.0;          // rad, positive pitches the view down
    double tilt_limit = deg2rad(25.0);
    double mount_height = 1.2;         // m above the floor
    double footprint_range = 10.0;     // m, clip for the floor footprint

    bool operator==(const CameraMount&) const = default;
};

// Closed FoV boundaries are compared with this much slack so a point placed
// exactly on the edge survives trig round-off.
inline constexpr double kFovEdgeTolerance = 1e-9;

struct CameraFrustum {
    double pitch = 0.0;  // rad below horizontal
    double half_h = 0.0;
    double half_v = 0.0;
    double height = 0.0;
    std::vector<Vec2> footprint;  // floor polygon, CCW, empty if the view misses the floor
};

namespace detail {

struct CameraAxes {
    Vec3 forward, left, up;
};

inline CameraAxes camera_axes(double pitch) {
    double c = std::cos(pitch), s = std::sin(pitch);
    return {{c, 0, -s}, {0, 1, 0}, {s, 0, c}};
}

}  // namespace detail

inline void validate(const CameraMount& m) {
    if (!(m.h_fov > 0.0) || !(m.h_fov < pi))
        throw validation_error("horizontal FoV must be in (0, 180) deg", "camera.h_fov_deg");
    if (!(m.v_fov > 0.0) || !(m.v_fov < pi))
        throw validation_error("vertical FoV must be in (0, 180) deg", "camera.v_fov_deg");
    if (std::abs(m.manual_tilt) > m.tilt_limit)
        throw validation_error("manual tilt beyond +/-" + text::fmt9(rad2deg(m.tilt_limit)) + " deg",
                               "camera.tilt_deg");
    if (!(m.mount_height > 0.0))
        throw validation_error("camera height must be > 0", "camera.mount_height");
    if (!(m.footprint_range > 0.0))
        throw validation_error("footprint range must be > 0", "camera.footprint_range");
}

// Intersection of the view pyramid with the floor, clipped to a square of
// half-size footprint_range around the robot.
inline std::vector<Vec2> floor_footprint(double pitch, const CameraMount& m) {
    auto ax = detail::camera_axes(pitch);
    double th = std::tan(m.h_fov / 2), tv = std::tan(m.v_fov / 2);
    // Inward normals of the four side planes through the camera center.
    std::array<Vec3, 4> normals;
    auto combo = [](const Vec3& a, double ka, const Vec3& b, double kb) {
        return Vec3{a.x * ka + b.x * kb, a.y * ka + b.y * kb, a.z * ka + b.z * kb};
    };
    normals[0] = combo(ax.forward, th, ax.left, -1.0);  // right edge
    normals[1] = combo(ax.forward, th, ax.left, 1.0);   // left edge
    normals[2] = combo(ax.forward, tv, ax.up, -1.0);    // top edge
    normals[3] = combo(ax.forward, tv, ax.up, 1.0);     // bottom edge

    double r = m.footprint_range;
    std::vector<Vec2> poly = {{-r, -r}, {r, -r}, {r, r}, {-r, r}};
    for (const Vec3& n : normals) {
        auto side = [&](const Vec2& p) {
            return n.x * p.x + n.y * p.y + n.z * (-m.mount_height);
        };
        std::vector<Vec2> out;
        for (size_t i = 0; i < poly.size(); ++i) {
            const Vec2& a = poly[i];
            const Vec2& b = poly[(i + 1) % poly.size()];
            double da = side(a), db = side(b);
            if (da >= 0) out.push_back(a);
            if ((da >= 0) != (db >= 0)) {
                double t = da / (da - db);
                out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
            }
        }
        poly = std::move(out);
        if (poly.empty()) break;
    }
    return poly;
}

// Torso bow pitches the camera down by the waist angle.
inline CameraFrustum camera_frustum(const CameraMount& m, double waist_theta,
                                    const WaistLimits& lim = {}) {
    if (!lim.contains(waist_theta))
        throw validation_error("waist angle outside limits", "waist_theta");
    CameraFrustum f;
    f.pitch = m.manual_tilt + waist_theta;
    f.half_h = m.h_fov / 2;
    f.half_v = m.v_fov / 2;
    f.height = m.mount_height;
    f.footprint = floor_footprint(f.pitch, m);
    return f;
}

// `p` is relative to the floor point under the camera (robot frame).
inline bool point_in_frustum(const Vec3& p, const CameraFrustum& f) {
    Vec3 d{p.x, p.y, p.z - f.height};
    auto ax = detail::camera_axes(f.pitch);
    double fwd = dot(d, ax.forward);
    if (!(fwd > 0.0)) return false;
    double horiz = std::atan2(dot(d, ax.left), fwd);
    double vert = std::atan2(dot(d, ax.up), fwd);
    return std::abs(horiz) <= f.half_h + kFovEdgeTolerance &&
           std::abs(vert) <= f.half_v + kFovEdgeTolerance;
}

inline bool point_in_camera_fov(const Vec3& p, const CameraMount& m, double waist_theta,
                                const WaistLimits& lim = {}) {
    return point_in_frustum(p, camera_frustum(m, waist_theta, lim));
}

// ----------------------------------------------------------------- laser

struct Occluder {
    double bearing = 0.0;  // rad, center of the shadow in the sensor frame
    double width = 0.0;    // rad
    bool operator==(const Occluder&) const = default;
};

struct LaserMount {
    double range_max = 8.0;             // m
    double mount_offset = 0.100;        // m forward of the base center
    double heading = 0.0;               // sensor boresight in the base frame
    double intrinsic_fov = deg2rad(264.0);
    std::vector<Occluder> occluders = {{deg2rad(-128.0), deg2rad(8.0)},
                                       {deg2rad(1.0), deg2rad(8.0)}};

    bool operator==(const LaserMount&) const = default;
};

// "bearing_deg:width_deg;bearing_deg:width_deg"
inline std::vector<Occluder> parse_occluders(std::string_view s) {
    std::vector<Occluder> out;
    s = text::trim(s);
    if (s.empty()) return out;
    size_t pos = 0;
    while (pos <= s.size()) {
        auto semi = s.find(';', pos);
        auto item = text::trim(s.substr(pos, semi == std::string_view::npos ? semi : semi - pos));
        auto colon = item.find(':');
        if (colon == std::string_view::npos)
            throw validation_error("occluder must be bearing:width", "laser.occluders");
        auto b = text::parse_double(item.substr(0, colon));
        auto w = text::parse_double(item.substr(colon + 1));
        if (!b || !w) throw validation_error("occluder must be numeric", "laser.occluders");
        out.push_back({deg2rad(*b), deg2rad(*w)});
        if (semi == std::string_view::npos) break;
        pos = semi + 1;
    }
    return out;
}

inline std::string format_occluders(const std::vector<Occluder>& occ) {
    std::string s;
    for (const auto& o : occ) {
        if (!s.empty()) s += ";";
        auto deg = [](double r) {
            return text::fmt_roundtrip(r, rad2deg(r), [](double d) { return deg2rad(d); });
        };
        s += deg(o.bearing) + ":" + deg(o.width);
    }
    return s;
}

inline void validate(const LaserMount& m, double base_radius) {
    if (!(m.range_max > 0.0)) throw validation_error("laser range must be > 0", "laser.range");
    if (m.mount_offset < 0.0 || !(m.mount_offset < base_radius))
        throw validation_error("laser offset must lie inside the base", "laser.offset");
    if (!(m.intrinsic_fov > 0.0) || m.intrinsic_fov > two_pi)
        throw validation_error("laser FoV must be in (0, 360] deg", "laser.fov_deg");
    for (const auto& o : m.occluders)
        if (!(o.width > 0.0)) throw validation_error("occluder width must be > 0", "laser.occluders");
}

// Visible bearing interval, degrees in the sensor frame.
struct Arc {
    double start_deg = 0.0;
    double end_deg = 0.0;
    double width_deg() const { return end_deg - start_deg; }
};

// Intrinsic sector minus occluder shadows. Overlapping shadows merge.
// Works in degrees so that printed widths come out exact.
inline std::vector<Arc> laser_coverage(const LaserMount& m) {
    double half = rad2deg(m.intrinsic_fov) / 2;
    std::vector<Arc> shadows;
    for (const auto& o : m.occluders) {
        double c = rad2deg(o.bearing), w = rad2deg(o.width);
        shadows.push_back({c - w / 2, c + w / 2});
    }
    std::sort(shadows.begin(), shadows.end(),
              [](const Arc& a, const Arc& b) { return a.start_deg < b.start_deg; });
    std::vector<Arc> arcs;
    double cursor = -half;
    for (const Arc& s : shadows) {
        double a = std::max(s.start_deg, -half), b = std::min(s.end_deg, half);
        if (b <= a) continue;
        if (a > cursor) arcs.push_back({cursor, a});
        cursor = std::max(cursor, b);
    }
    if (cursor < half) arcs.push_back({cursor, half});
    return arcs;
}

struct LaserHit {
    bool visible = false;
    double range = 0.0;    // m from the sensor
    double bearing = 0.0;  // rad in the sensor frame
};

// `p` in world coordinates; the scanner rides on the diff-drive base.
inline LaserHit laser_visible(const Vec2& p, const BaseState& pose, const LaserMount& m) {
    double c = std::cos(pose.phi), s = std::sin(pose.phi);
    Vec2 sensor{pose.x + c * m.mount_offset, pose.y + s * m.mount_offset};
    double dx = p.x - sensor.x, dy = p.y - sensor.y;
    LaserHit hit;
    hit.range = std::hypot(dx, dy);
    hit.bearing = normalize_angle(std::atan2(dy, dx) - pose.phi - m.heading);
    if (hit.range > m.range_max) return hit;
    double deg = rad2deg(hit.bearing);
    for (const Arc& a : laser_coverage(m))
        if (deg >= a.start_deg && deg <= a.end_deg) hit.visible = true;
    return hit;
}

// --------------------------------------------------------------- speaker

struct SpeakerSpec {
    double reference_spl = 60.0;     // dB
    double reference_distance = 3.0; // m

    bool operator==(const SpeakerSpec&) const = default;
};

// Free-field inverse-square falloff.
inline double speaker_spl(const SpeakerSpec& s, double distance) {
    if (!(distance > 0.0)) throw validation_error("distance must be > 0", "distance");
    return s.reference_spl - 20.0 * std::log10(distance / s.reference_distance);
}

}  // namespace quori
