#pragma once

#include <cmath>
#include <numbers>

namespace quori {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

constexpr double deg2rad(double deg) { return deg * pi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / pi; }

// Wrap into (-pi, pi].
inline double normalize_angle(double a) {
    double r = std::remainder(a, two_pi);  // [-pi, pi]
    if (r <= -pi) r += two_pi;
    return r;
}

// Wrap into [0, 2pi).
inline double wrap_positive(double a) {
    double r = std::fmod(a, two_pi);
    if (r < 0) r += two_pi;
    if (r >= two_pi) r = 0.0;
    return r;
}

inline double sign(double x) { return (x > 0) - (x < 0); }

}  // namespace quori
