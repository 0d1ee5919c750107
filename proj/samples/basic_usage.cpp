// Drives the base in a circle, checks a waist pose and renders ring sizes.

#include <cstdio>

#include "quori/quori.hpp"

int main() {
    using namespace quori;
    PlatformConfig cfg = default_config();

    BaseState pose;
    BodyTwist twist{0.3, 0.0, 0.5};
    for (int i = 0; i < 100; ++i) {
        ActuatorRates r = inverse_kinematics(twist, pose, cfg.base);
        pose = integrate_odometry(pose, r, 0.01, cfg.base);
    }
    std::printf("after 1 s: x=%.3f y=%.3f heading=%.3f rad\n", pose.x, pose.y,
                pose.torso_heading());

    auto peak = peak_holding_torque(compensated_model(cfg.waist), cfg.waist.limits);
    std::printf("compensated waist peak: %.2f N·m at %.1f deg bow\n", peak.torque,
                rad2deg(peak.theta_w));

    for (double deg : {10.0, 50.0, 90.0})
        std::printf("ring at %2.0f deg: %ld px\n", deg, ring_pixel_count(deg2rad(deg), cfg.head));
}
