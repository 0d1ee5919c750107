#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>

#include "test_support.hpp"

using namespace quori;
using quori::test::uniform;

namespace {

std::string number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <class E>
E expect_throw(const std::string& doc) {
    try {
        load_config(doc);
    } catch (const E& e) {
        return e;
    }
    ADD_FAILURE() << "no exception for:\n" << doc;
    return E("", {});
}

}  // namespace

TEST(Config, EmptyDocumentIsDefault) {
    EXPECT_EQ(load_config(""), default_config());
    EXPECT_EQ(load_config("# only a comment\n\n   \n"), default_config());
}

TEST(Config, OverrideOneKey) {
    auto c = load_config("base.wheel_radius = 0.05  # smaller wheels\n");
    EXPECT_EQ(c.base.wheel_radius, 0.05);
    PlatformConfig expect = default_config();
    expect.base.wheel_radius = 0.05;
    EXPECT_EQ(c, expect);
}

TEST(Config, AnglesReadInDegrees) {
    auto c = load_config("behavior.bow_angle_deg = 15\n");
    EXPECT_DOUBLE_EQ(c.behavior.bow_angle, deg2rad(15));
}

TEST(Config, ZeroTurretOffsetNamesKey) {
    auto e = expect_throw<validation_error>("base.turret_offset = 0\n");
    EXPECT_EQ(e.key(), "base.turret_offset");
}

TEST(Config, InvariantViolationsNameKeys) {
    EXPECT_EQ(expect_throw<validation_error>("arm.abduction_limit_deg = 95\n").key(), "arm.abduction_limit_deg");
    EXPECT_EQ(expect_throw<validation_error>("behavior.bow_angle_deg = 40\n").key(), "behavior.bow_angle_deg");
    EXPECT_EQ(expect_throw<validation_error>("mass.head = -1\n").key(), "mass.head");
    EXPECT_EQ(expect_throw<validation_error>("laser.offset = 0.5\n").key(), "laser.offset");
}

TEST(Config, SyntaxErrorsCarryLine) {
    EXPECT_EQ(expect_throw<parse_error>("base.diameter = 0.5\nno_equals_sign\n").line(), 2);
    EXPECT_EQ(expect_throw<parse_error>("\n\nbase.nope = 1\n").line(), 3);
    EXPECT_EQ(expect_throw<parse_error>("base.diameter = 0.5\nbase.diameter = 0.6\n").line(), 2);
    EXPECT_EQ(expect_throw<parse_error>("base.diameter = wide\n").line(), 1);
    EXPECT_EQ(expect_throw<parse_error>("behavior.free_roam = yes\n").line(), 1);
    EXPECT_EQ(expect_throw<parse_error>("base.diameter = inf\n").line(), 1);
    auto e = expect_throw<parse_error>("x\n");
    EXPECT_EQ(std::string(e.what()).rfind("line 1: ", 0), 0u);
}

TEST(Config, DefaultSerializationIsFixedPoint) {
    std::string once = serialize_config(default_config());
    EXPECT_EQ(load_config(once), default_config());
    EXPECT_EQ(serialize_config(load_config(once)), once);
    EXPECT_NE(once.find("arm.abduction_limit_deg = 70\n"), std::string::npos);
    EXPECT_NE(once.find("camera.v_fov_deg = 49.5\n"), std::string::npos);
    EXPECT_NE(once.find("laser.occluders = -128:8;1:8\n"), std::string::npos);
}

TEST(Config, RandomConfigsRoundTrip) {
    struct Range {
        const char* key;
        double lo, hi;
    };
    const Range ranges[] = {
        {"base.wheel_radius", 0.02, 0.1},      {"base.turret_offset", 0.01, 0.2},
        {"base.max_linear_speed", 0.1, 1.5},   {"arm.clutch_torque", 0.5, 6.0},
        {"arm.abduction_limit_deg", 10, 90},   {"waist.forward_limit_deg", 5, 40},
        {"waist.m_upper", 0, 20},              {"waist.l_lower", 0.05, 0.3},
        {"camera.h_fov_deg", 10, 170},         {"camera.tilt_deg", -25, 25},
        {"laser.heading_deg", -180, 180},      {"behavior.turret_deadband_deg", 0, 10},
        {"behavior.sleep_timeout", 1, 100},    {"sim.waist_gain", 0.1, 10},
        {"head.theta_top_deg", 5, 30},         {"projector.rated_lumens", 0, 1000},
    };
    for (int i = 0; i < 300; ++i) {
        std::string doc;
        for (const auto& r : ranges)
            if (uniform(0, 1) < 0.5) doc += std::string(r.key) + " = " + number(uniform(r.lo, r.hi)) + "\n";
        if (uniform(0, 1) < 0.5) doc += "mass.extra = " + number(uniform(0, 5)) + "\n";
        PlatformConfig c;
        try {
            c = load_config(doc);
        } catch (const validation_error&) {
            continue;  // some combinations break cross-field invariants
        }
        std::string s = serialize_config(c);
        ASSERT_EQ(load_config(s), c) << doc;
        ASSERT_EQ(serialize_config(load_config(s)), s);
    }
}

TEST(Config, ShippedFileMatchesDefaults) {
    EXPECT_EQ(load_config_file(quori::test::data_path("quori.conf")), default_config());
}

TEST(Config, HashTracksValues) {
    auto a = config_hash(default_config());
    EXPECT_EQ(a, config_hash(load_config("")));
    EXPECT_NE(a, config_hash(load_config("sim.dt = 0.02\n")));
}

TEST(Config, MassTableReplacedWhenGiven) {
    auto c = load_config("mass.base = 10\nmass.head = 2\n");
    EXPECT_EQ(c.mass_table.size(), 2u);
    EXPECT_DOUBLE_EQ(mass_total(c), 12.0);
}

TEST(Mass, Rollup) {
    EXPECT_DOUBLE_EQ(mass_total(default_config()), 45.5);
    EXPECT_EQ(mass_total(std::map<std::string, double>{}), 0.0);
    EXPECT_EQ(mass_total(std::map<std::string, double>{{"base", 9.8}}), 9.8);
    std::map<std::string, double> a{{"x", 1.25}, {"y", 3.5}}, b{{"z", 0.75}};
    auto ab = a;
    ab.insert(b.begin(), b.end());
    EXPECT_DOUBLE_EQ(mass_total(ab), mass_total(a) + mass_total(b));
}

TEST(Mass, IndependentOfListingOrder) {
    std::vector<std::pair<std::string, double>> items{{"a", 1.1}, {"b", 2.2}, {"c", 3.3}, {"arm", 0.4}};
    double ref = mass_total(std::map<std::string, double>(items.begin(), items.end()));
    std::sort(items.begin(), items.end());
    do {
        std::string doc;
        for (const auto& [k, v] : items) doc += "mass." + k + " = " + number(v) + "\n";
        EXPECT_EQ(mass_total(load_config(doc)), ref);
    } while (std::next_permutation(items.begin(), items.end()));
}

TEST(Bom, ShippedTableTotal) {
    auto t = parse_bom_csv(read_text_file(quori::test::data_path("bom.csv")));
    EXPECT_EQ(t.lines.size(), 24u);
    EXPECT_EQ(bom_total(t), 632000);
    auto issues = bom_check(t);
    ASSERT_EQ(issues.size(), 2u);
    for (const auto& i : issues) EXPECT_TRUE(i.rounding);
}

TEST(Bom, SmallTables) {
    std::string header = std::string(kBomHeader) + "\n";
    EXPECT_EQ(bom_total(parse_bom_csv(header)), 0);
    EXPECT_EQ(bom_total(parse_bom_csv(header + "Arms,Motor modules,4,105,420\n")), 42000);
    EXPECT_THROW(parse_bom_csv(header + "Arms,Motor modules,-4,105,420\n"), validation_error);
    EXPECT_THROW(parse_bom_csv(header + "Arms,Motor modules,4,x,420\n"), parse_error);
    EXPECT_THROW(parse_bom_csv("item,qty\n"), parse_error);
    auto big = bom_check(parse_bom_csv(header + "Arms,Motors,4,105,400\n"));
    ASSERT_EQ(big.size(), 1u);
    EXPECT_FALSE(big[0].rounding);
}

TEST(Bom, Cents) {
    EXPECT_EQ(parse_cents("12.5"), 1250);
    EXPECT_EQ(parse_cents("0.07"), 7);
    EXPECT_EQ(parse_cents("-3"), -300);
    EXPECT_FALSE(parse_cents("1.234"));
    EXPECT_FALSE(parse_cents("1e3"));
    EXPECT_EQ(format_cents(632000), "6320");
    EXPECT_EQ(format_cents(1205), "12.05");
    EXPECT_EQ(format_cents(-50), "-0.50");
}

TEST(Power, Runtime) {
    BatterySpec b;
    EXPECT_DOUBLE_EQ(power_runtime(b, 96.0), 5.0);
    EXPECT_DOUBLE_EQ(power_runtime(b, 480.0), 1.0);
    EXPECT_THROW(power_runtime(b, 0.0), validation_error);
    EXPECT_THROW(power_runtime(b, -5.0), validation_error);
}

TEST(Power, EstopCutsMotorsOnly) {
    PowerState on;
    PowerState stopped = apply_estop(on, true);
    EXPECT_FALSE(stopped.motor_bus_on);
    EXPECT_TRUE(stopped.compute_bus_on);
    EXPECT_TRUE(stopped.projector_on);
    EXPECT_FALSE(motor_bus_restorable(stopped));
    EXPECT_THROW(restore_motor_bus(stopped), validation_error);
    EXPECT_EQ(apply_estop(stopped, true), stopped);
    PowerState released = apply_estop(stopped, false);
    EXPECT_FALSE(released.motor_bus_on);  // release alone does not re-energize
    EXPECT_TRUE(motor_bus_restorable(released));
    EXPECT_TRUE(restore_motor_bus(released).motor_bus_on);
}
