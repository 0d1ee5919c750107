#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "test_support.hpp"

using namespace quori;

namespace {

const WaistConfig kWaist;
const WaistLimits kLim;

struct Body {
    double m, x, z;  // mass and position (x forward, z up) relative to the pivot
};

// Oracle: place every point mass explicitly and sum gravity moments and
// m·r² directly.
std::vector<Body> bodies(const TorsoMassModel& m, double th, double phi_l, double phi_r) {
    auto along = [&](double len, double ang) { return std::pair{len * std::sin(ang), len * std::cos(ang)}; };
    std::vector<Body> out;
    auto [ux, uz] = along(m.l_upper, th);
    out.push_back({m.m_upper, ux, uz});
    for (double phi : {phi_l, phi_r}) {
        auto [sx, sz] = along(m.l_shoulder, th);
        auto [ax, az] = along(m.l_arm, th + phi);
        out.push_back({m.m_arm, sx + ax, sz + az});
    }
    auto [lx, lz] = along(-m.l_lower, th);
    out.push_back({m.m_lower, lx, lz});
    for (const auto& p : m.extra_lower) {
        auto [ex, ez] = along(-p.lever, th);
        out.push_back({p.mass, ex, ez});
    }
    return out;
}

double oracle_torque(const TorsoMassModel& m, double th, double phi) {
    double tau = 0.0;
    for (const auto& b : bodies(m, th, phi, phi)) tau += m.gravity * b.m * b.x;
    return tau;
}

double oracle_inertia(const TorsoMassModel& m, double phi) {
    double i = m.i_extra;
    for (const auto& b : bodies(m, 0.3, phi, phi)) i += b.m * (b.x * b.x + b.z * b.z);
    return i;
}

struct GridPeak {
    double torque = 0.0, theta = 0.0, phi = 0.0;
};

// 0.5-degree brute force over the full waist range and arm revolution.
GridPeak grid_peak(const TorsoMassModel& m) {
    GridPeak best;
    for (int t = -30; t <= 60; ++t) {
        double th = deg2rad(0.5 * t);
        for (int p = 0; p < 720; ++p) {
            double phi = deg2rad(0.5 * p);
            double tau = std::abs(oracle_torque(m, th, phi));
            if (tau > best.torque) best = {tau, th, phi};
        }
    }
    return best;
}

}  // namespace

TEST(HoldingTorque, MatchesPointMassOracle) {
    for (const auto& m : {uncompensated_model(kWaist), compensated_model(kWaist)})
        for (double th : {-0.25, 0.0, 0.1, 0.5})
            for (double phi : {0.0, 1.0, 2.5, 4.0})
                EXPECT_NEAR(holding_torque(m, {th, phi, 0.0}, kLim), oracle_torque(m, th, phi), 1e-12);
}

TEST(HoldingTorque, BalancedModelWithoutArmOffsetIsZero) {
    TorsoMassModel m;
    m.l_arm = 0.0;
    m.m_lower = (m.m_upper * m.l_upper + 2 * m.m_arm * m.l_shoulder) / m.l_lower;
    for (double th : {-0.2, 0.1, 0.5}) EXPECT_NEAR(holding_torque(m, {th, 1.0, 0.0}, kLim), 0.0, 1e-12);
}

TEST(HoldingTorque, UprightWithoutArmOffsetIsZero) {
    TorsoMassModel m;
    m.l_arm = 0.0;
    EXPECT_EQ(holding_torque(m, {0.0, 0.0, 0.0}, kLim), 0.0);
}

TEST(HoldingTorque, RejectsPoseOutsideLimits) {
    EXPECT_THROW(holding_torque(TorsoMassModel{}, {deg2rad(31), 0, 0}, kLim), validation_error);
    EXPECT_THROW(holding_torque(TorsoMassModel{}, {deg2rad(-16), 0, 0}, kLim), validation_error);
    EXPECT_NO_THROW(holding_torque(TorsoMassModel{}, {kLim.forward, 0, 0}, kLim));
}

TEST(HoldingTorque, GradientInLowerMassMatchesFiniteDifference) {
    for (double th : {-0.2, 0.15, 0.5}) {
        TorsoMassModel m = compensated_model(kWaist);
        double analytic = -m.gravity * m.l_lower * std::sin(th);
        double h = 1e-3;
        TorsoMassModel hi = m, lo = m;
        hi.m_lower += h;
        lo.m_lower -= h;
        double fd = (holding_torque(hi, {th, 0.7, 0.0}, kLim) - holding_torque(lo, {th, 0.7, 0.0}, kLim)) /
                    (2 * h);
        EXPECT_LT(std::abs(fd - analytic) / std::abs(analytic), 1e-6);
    }
}

TEST(HoldingTorque, LinearInEachMass) {
    TorsoMassModel a = compensated_model(kWaist), b = a, ab = a;
    b.m_upper *= 2.0;
    ab.m_upper *= 3.0;
    double t0 = holding_torque(a, {0.3, 1.1, 0}, kLim);
    double t1 = holding_torque(b, {0.3, 1.1, 0}, kLim);
    double t2 = holding_torque(ab, {0.3, 1.1, 0}, kLim);
    EXPECT_NEAR(t2 - t1, t1 - t0, 1e-12);
}

TEST(PeakTorque, UncompensatedNearSixteen) {
    auto p = peak_holding_torque(uncompensated_model(kWaist), kLim);
    EXPECT_NEAR(p.torque, 16.0, 1.0);
    EXPECT_DOUBLE_EQ(p.theta_w, kLim.forward);
}

TEST(PeakTorque, CompensatedBelowTwo) {
    EXPECT_LT(peak_holding_torque(compensated_model(kWaist), kLim).torque, 2.0);
}

TEST(PeakTorque, ZeroMassModelIsZero) {
    TorsoMassModel m;
    m.m_upper = m.m_arm = m.m_lower = 0.0;
    EXPECT_EQ(peak_holding_torque(m, kLim).torque, 0.0);
}

TEST(PeakTorque, AgreesWithBruteForceGrid) {
    for (const auto& m : {uncompensated_model(kWaist), battery_only_model(kWaist), compensated_model(kWaist)}) {
        auto analytic = peak_holding_torque(m, kLim);
        auto grid = grid_peak(m);
        EXPECT_GE(analytic.torque, grid.torque - 1e-12);
        // Grid resolution bounds the gap: d tau / d angle <= 2 g (m a + N) per rad.
        EXPECT_NEAR(analytic.torque, grid.torque, 1e-3);
        EXPECT_NEAR(analytic.theta_w, grid.theta, 1e-12);
    }
}

TEST(PeakTorque, AnalyticWorstArmAngleWithinOneGridStep) {
    const double step = deg2rad(0.5);
    for (const auto& m : {uncompensated_model(kWaist), compensated_model(kWaist)}) {
        for (int t = -30; t <= 60; t += 5) {
            double th = deg2rad(0.5 * t);
            if (std::abs(net_first_moment(m) * std::sin(th)) < 1e-9) continue;  // ties
            double best = -1, arg = 0;
            for (int p = 0; p < 720; ++p) {
                double phi = p * step;
                double tau = std::abs(oracle_torque(m, th, phi));
                if (tau > best) best = tau, arg = phi;
            }
            double d = std::abs(normalize_angle(worst_arm_angle(m, th) - arg));
            EXPECT_LE(d, step + 1e-12) << "theta=" << rad2deg(th);
        }
    }
}

TEST(PeakTorque, MonotoneInLowerMassUpToBalance) {
    TorsoMassModel m = uncompensated_model(kWaist);
    double balance = net_first_moment(m) / m.l_lower;
    double prev = 1e9;
    for (int i = 0; i <= 100; ++i) {
        TorsoMassModel k = m;
        k.m_lower = balance * i / 100.0;
        double p = peak_holding_torque(k, kLim).torque;
        EXPECT_LE(p, prev + 1e-12);
        prev = p;
    }
}

TEST(WaistInertia, MatchesPointMassOracle) {
    TorsoMassModel m = compensated_model(kWaist);
    m.i_extra = 0.05;
    for (double phi : {0.0, 1.0, pi, 5.0}) EXPECT_NEAR(waist_inertia(m, phi, phi), oracle_inertia(m, phi), 1e-12);
}

TEST(TotalMotorTorque, StaticEqualsHolding) {
    TorsoMassModel m = compensated_model(kWaist);
    WaistPose pose{0.4, 1.3, 0.0};
    EXPECT_EQ(total_motor_torque(m, pose, 0.0, kLim).total(), holding_torque(m, pose, kLim));
}

TEST(TotalMotorTorque, PureInertia) {
    TorsoMassModel m;
    m.m_upper = m.m_arm = m.m_lower = 0.0;
    m.i_extra = 2.5;
    m.damper_torque = 0.0;
    EXPECT_DOUBLE_EQ(total_motor_torque(m, {0.0, 0.0, 1.0}, 0.0, kLim).total(), 2.5);
}

TEST(TotalMotorTorque, WithinBoundAcrossFullSweep) {
    TorsoMassModel m = compensated_model(kWaist);
    double worst = 0.0;
    for (int t = -30; t <= 60; ++t)
        for (int p = 0; p < 720; ++p)
            for (double acc : {-1.0, 1.0})
                for (double rate : {-1.0, 1.0}) {
                    WaistPose pose{deg2rad(0.5 * t), deg2rad(0.5 * p), acc};
                    worst = std::max(worst, std::abs(total_motor_torque(m, pose, rate, kLim).total()));
                }
    EXPECT_LE(worst, kWaist.torque_bound);
}

TEST(TotalMotorTorque, DamperIsOddInVelocity) {
    TorsoMassModel m = compensated_model(kWaist);
    WaistPose pose{0.2, 0.9, 0.5};
    auto a = total_motor_torque(m, pose, 0.4, kLim);
    auto b = total_motor_torque(m, pose, -0.4, kLim);
    EXPECT_EQ(a.holding, b.holding);
    EXPECT_EQ(a.inertial, b.inertial);
    EXPECT_EQ(a.damper, -b.damper);
}

TEST(TotalMotorTorque, RejectsRateAndAccelBeyondLimits) {
    TorsoMassModel m;
    EXPECT_THROW(total_motor_torque(m, {0.0, 0.0, 0.0}, 1.01, kLim), validation_error);
    EXPECT_THROW(total_motor_torque(m, {0.0, 0.0, -1.01}, 0.0, kLim), validation_error);
}

TEST(TuneCounterMass, RecoversAboutSixKilograms) {
    auto t = tune_counter_mass(battery_only_model(kWaist), 2.0, kWaist.l_lower, kLim);
    EXPECT_NEAR(t.added_mass, 6.0, 1.5);
    EXPECT_LE(t.peak.torque, 2.0);
    // Bisection oracle: slightly less mass misses the target.
    TorsoMassModel less = battery_only_model(kWaist);
    less.extra_lower.push_back({t.added_mass - 1e-6, kWaist.l_lower});
    EXPECT_GT(grid_peak(less).torque, 2.0 - 1e-3);
}

TEST(TuneCounterMass, BalancedModelNeedsNothing) {
    TorsoMassModel m = compensated_model(kWaist);
    double peak = peak_holding_torque(m, kLim).torque;
    EXPECT_EQ(tune_counter_mass(m, peak, 0.165, kLim).added_mass, 0.0);
    EXPECT_EQ(tune_counter_mass(m, peak + 1.0, 0.165, kLim).added_mass, 0.0);
}

TEST(TuneCounterMass, ZeroTargetIsInfeasible) {
    try {
        tune_counter_mass(battery_only_model(kWaist), 0.0, kWaist.l_lower, kLim);
        FAIL();
    } catch (const validation_error& e) {
        std::string msg = e.what();
        EXPECT_NE(msg.find("theta_w="), std::string::npos);
        EXPECT_NE(msg.find("phi_a="), std::string::npos);
    }
}

TEST(Sweep, CoversFullRevolution) {
    auto s = sweep_arm_flexion(compensated_model(kWaist), kLim.forward, deg2rad(0.5));
    ASSERT_EQ(s.size(), 720u);
    EXPECT_NEAR(s[180].phi_a, pi / 2, 1e-12);
}
