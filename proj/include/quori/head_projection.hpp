#pragma once

// Rear-projected spherical face.
//
// The projector image is reflected by a dome mirror onto the inside of the
// head shell. The optics are collapsed into one radial profile: a sphere
// point at polar angle theta (0 = top of head) and azimuth lambda lands on
// the projector image at
//
//     (u, v) = optical_center + rho(theta) (cos lambda, sin lambda)
//
// with rho strictly monotone, so every pixel inside the annulus
// [rho_min, rho_max] belongs to exactly one sphere point. The top of the
// head gets the outer (long) rings, the neck the inner (short) ones.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "angles.hpp"
#include "errors.hpp"
#include "raster.hpp"
#include "text.hpp"

namespace quori {

struct ProjectorSpec {
    double rated_lumens = 300.0;
    double lifetime_hours = 20000.0;
    int width = 1280;
    int height = 720;

    bool operator==(const ProjectorSpec&) const = default;
};

// Light reaching the sphere: the inscribed circle of the image rectangle.
inline double usable_lumens(const ProjectorSpec& p) {
    double r = std::min(p.width, p.height) / 2.0;
    return p.rated_lumens * pi * r * r / (static_cast<double>(p.width) * p.height);
}

// Piecewise-linear, strictly monotone rho(theta).
class RadialProfile {
public:
    struct Sample {
        double theta;
        double rho;
        bool operator==(const Sample&) const = default;
    };

    RadialProfile() = default;

    explicit RadialProfile(std::vector<Sample> samples) : samples_(std::move(samples)) {
        if (samples_.size() < 2)
            throw validation_error("radial profile needs at least two samples", "radial_profile");
        std::sort(samples_.begin(), samples_.end(),
                  [](const Sample& a, const Sample& b) { return a.theta < b.theta; });
        double dir = samples_[1].rho - samples_[0].rho;
        for (size_t i = 1; i < samples_.size(); ++i) {
            double dt = samples_[i].theta - samples_[i - 1].theta;
            double dr = samples_[i].rho - samples_[i - 1].rho;
            if (!(dt > 0.0) || !(dr * dir > 0.0))
                throw validation_error("radial profile must be strictly monotone",
                                       "radial_profile");
        }
    }

    static RadialProfile linear(double theta_top, double rho_at_top, double theta_bottom,
                                double rho_at_bottom) {
        return RadialProfile({{theta_top, rho_at_top}, {theta_bottom, rho_at_bottom}});
    }

    const std::vector<Sample>& samples() const { return samples_; }
    double theta_min() const { return samples_.front().theta; }
    double theta_max() const { return samples_.back().theta; }

    double rho(double theta) const {
        return interpolate(theta, &Sample::theta, &Sample::rho);
    }

    double theta(double rho) const {
        return interpolate(rho, &Sample::rho, &Sample::theta);
    }

    bool operator==(const RadialProfile&) const = default;

private:
    // Works in either direction since both columns are monotone.
    double interpolate(double x, double Sample::*from, double Sample::*to) const {
        bool ascending = samples_.back().*from > samples_.front().*from;
        size_t n = samples_.size();
        size_t hi = 1;
        while (hi < n - 1 &&
               (ascending ? x > samples_[hi].*from : x < samples_[hi].*from))
            ++hi;
        const Sample& a = samples_[hi - 1];
        const Sample& b = samples_[hi];
        double t = (x - a.*from) / (b.*from - a.*from);
        return a.*to + t * (b.*to - a.*to);
    }

    std::vector<Sample> samples_;
};

// Two-column CSV: theta_deg, rho_px. Header line optional, '#' comments.
inline RadialProfile parse_radial_profile_csv(std::string_view doc) {
    std::vector<RadialProfile::Sample> samples;
    int lineno = 0;
    for (auto raw : text::split_lines(doc)) {
        ++lineno;
        auto line = text::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        auto f = text::split_csv(line);
        if (f.size() != 2) throw parse_error("expected 2 columns", lineno);
        auto th = text::parse_double(f[0]);
        auto rh = text::parse_double(f[1]);
        if (!th || !rh) {
            if (samples.empty() && lineno == 1) continue;  // header
            throw parse_error("non-numeric profile row", lineno);
        }
        samples.push_back({deg2rad(*th), *rh});
    }
    return RadialProfile(std::move(samples));
}

struct SphereMapCalibration {
    int image_width = 1280;
    int image_height = 720;
    double center_u = 640.0;
    double center_v = 360.0;
    double rho_min = 32.0;
    double rho_max = 320.0;
    double theta_top = deg2rad(10.0);
    double theta_max = deg2rad(90.0);
    RadialProfile profile = RadialProfile::linear(deg2rad(10.0), 320.0, deg2rad(90.0), 32.0);

    bool operator==(const SphereMapCalibration&) const = default;
};

inline void validate(const SphereMapCalibration& c) {
    if (c.image_width <= 0 || c.image_height <= 0)
        throw validation_error("image size must be positive", "projector.width");
    if (!(c.rho_min > 0.0)) throw validation_error("rho_min must be > 0", "head.rho_min");
    if (!(c.rho_max > c.rho_min))
        throw validation_error("rho_max must exceed rho_min", "head.rho_max");
    if (c.rho_max > std::min(c.image_width, c.image_height) / 2.0)
        throw validation_error("rho_max exceeds half the short image side", "head.rho_max");
    if (!(c.theta_max > c.theta_top) || c.theta_top < 0.0 || c.theta_max > pi)
        throw validation_error("coverage band must satisfy 0 <= theta_top < theta_max <= 180 deg",
                               "head.theta_max_deg");
    auto near = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); };
    double r_top = c.profile.rho(c.theta_top), r_bot = c.profile.rho(c.theta_max);
    bool spans = near(std::max(r_top, r_bot), c.rho_max) && near(std::min(r_top, r_bot), c.rho_min);
    if (!spans || !near(c.profile.theta_min(), c.theta_top) ||
        !near(c.profile.theta_max(), c.theta_max))
        throw validation_error("radial profile must span the coverage band onto the annulus",
                               "radial_profile");
}

struct Pixel {
    double u = 0.0;
    double v = 0.0;
};

struct SpherePoint {
    double theta = 0.0;   // polar angle from the top of the head
    double lambda = 0.0;  // azimuth, (-pi, pi]
};

inline constexpr double kBandTolerance = 1e-12;

inline Pixel sphere_to_image(double theta, double lambda, const SphereMapCalibration& c) {
    if (theta < c.theta_top - kBandTolerance || theta > c.theta_max + kBandTolerance)
        throw validation_error("theta " + std::to_string(rad2deg(theta)) +
                                   " deg outside projected band",
                               "theta");
    double rho = c.profile.rho(std::clamp(theta, c.theta_top, c.theta_max));
    return {c.center_u + rho * std::cos(lambda), c.center_v + rho * std::sin(lambda)};
}

// nullopt means the pixel does not land on the head.
inline std::optional<SpherePoint> image_to_sphere(const Pixel& p, const SphereMapCalibration& c) {
    double du = p.u - c.center_u, dv = p.v - c.center_v;
    double rho = std::hypot(du, dv);
    if (rho < c.rho_min || rho > c.rho_max) return std::nullopt;
    return SpherePoint{c.profile.theta(rho), std::atan2(dv, du)};
}

// Distinct projector pixels on one latitude ring.
inline long ring_pixel_count(double theta, const SphereMapCalibration& c) {
    if (theta < c.theta_top - kBandTolerance || theta > c.theta_max + kBandTolerance)
        throw validation_error("theta outside projected band", "theta");
    return std::lround(two_pi * c.profile.rho(std::clamp(theta, c.theta_top, c.theta_max)));
}

inline bool in_annulus(int x, int y, const SphereMapCalibration& c) {
    double rho = std::hypot(x - c.center_u, y - c.center_v);
    return rho >= c.rho_min && rho <= c.rho_max;
}

inline long annulus_pixel_count(const SphereMapCalibration& c) {
    long n = 0;
    for (int y = 0; y < c.image_height; ++y)
        for (int x = 0; x < c.image_width; ++x) n += in_annulus(x, y, c);
    return n;
}

// Equirectangular face texture: columns span azimuth [0, 2pi), rows span
// polar angle [0, pi].
struct FaceTexture {
    Image image;
    double yaw_offset = 0.0;
    double pitch_offset = 0.0;
};

inline Rgb sample_texture(const Image& tex, double theta, double lambda) {
    double u = wrap_positive(lambda) / two_pi;
    int col = std::min(tex.width() - 1, static_cast<int>(std::floor(u * tex.width())));
    int row = std::clamp(static_cast<int>(std::floor(theta / pi * tex.height())), 0,
                         tex.height() - 1);
    return tex.at(col, row);
}

// Projector frame for a face texture. Head rotation is faked by shifting the
// texture lookup: yaw rotates every ring, pitch shifts latitude (clamped to
// the projected band). Nearest-neighbour sampling; off-head pixels are black.
inline Image render_face(const FaceTexture& tex, const SphereMapCalibration& c) {
    if (tex.image.empty()) throw validation_error("empty face texture", "texture");
    Image frame(c.image_width, c.image_height);
    const double yaw = std::remainder(tex.yaw_offset, two_pi);
    for (int y = 0; y < c.image_height; ++y) {
        for (int x = 0; x < c.image_width; ++x) {
            auto sp = image_to_sphere({static_cast<double>(x), static_cast<double>(y)}, c);
            if (!sp) continue;
            double theta = std::clamp(sp->theta - tex.pitch_offset, c.theta_top, c.theta_max);
            frame.at(x, y) = sample_texture(tex.image, theta, sp->lambda - yaw);
        }
    }
    return frame;
}

}  // namespace quori
