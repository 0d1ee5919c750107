#include <gtest/gtest.h>

#include <filesystem>
#include <map>
#include <vector>

#include "test_support.hpp"

using namespace quori;
using quori::test::data_path;

namespace {

const PlatformConfig kCfg = default_config();

std::vector<std::pair<double, Mode>> mode_entries(const RunLog& log) {
    std::vector<std::pair<double, Mode>> out;
    for (const auto& r : log.records)
        if (out.empty() || out.back().second != r.mode) out.push_back({r.t_ms / 1000.0, r.mode});
    return out;
}

const RunLog& museum_log() {
    static const RunLog log =
        run_scenario(load_scenario_file(data_path("scenarios/museum_demo.csv")), kCfg, 60.0, "museum_demo");
    return log;
}

}  // namespace

TEST(ScenarioCsv, ParsesFramesAndEmptyMarks) {
    auto s = parse_scenario_csv(
        "# comment\n"
        "t_s,visitor_id,x_m,y_m,left_arm_deg,right_arm_deg\n"
        "0,,,,,\n"
        "1.5,2,1,0,,\n"
        "1.5,1,2,0,90,10\n"
        "3,,,,,\n");
    ASSERT_EQ(s.keyframes.size(), 3u);
    EXPECT_TRUE(s.keyframes[0].visitors.empty());
    ASSERT_EQ(s.keyframes[1].visitors.size(), 2u);
    EXPECT_EQ(s.keyframes[1].visitors[0].id, 1);
    EXPECT_DOUBLE_EQ(s.keyframes[1].visitors[0].left_arm, deg2rad(90));
    EXPECT_EQ(s.keyframes[1].visitors[1].left_arm, 0.0);
}

TEST(ScenarioCsv, ErrorsCarryLine) {
    const std::string h = "t_s,visitor_id,x_m,y_m,left_arm_deg,right_arm_deg\n";
    auto line_of = [](const std::string& doc) {
        try {
            parse_scenario_csv(doc);
        } catch (const parse_error& e) {
            return e.line();
        }
        return -1;
    };
    EXPECT_EQ(line_of("t,x\n"), 1);
    EXPECT_EQ(line_of(h + "0,1,1,1,0,0\n0,1,2,2,0,0\n"), 3);
    EXPECT_EQ(line_of(h + "2,1,1,1,0,0\n1,1,1,1,0,0\n"), 3);
    EXPECT_EQ(line_of(h + "0,1,two,1,0,0\n"), 2);
    EXPECT_EQ(line_of(h + "0,1,1,1\n"), 2);
    EXPECT_EQ(line_of(h + "0,,,,,\n0,1,1,1,0,0\n"), 3);
    EXPECT_EQ(line_of(h + "0,1,1,1,0,0\n0,,,,,\n"), 3);
    EXPECT_EQ(line_of("# nothing\n"), 1);
    EXPECT_EQ(line_of(read_text_file(QUORI_TEST_DATA_DIR "/bad_scenario.csv")), 3);
}

TEST(ScenarioCsv, InterpolatesAndHolds) {
    auto s = parse_scenario_csv(
        "t_s,visitor_id,x_m,y_m,left_arm_deg,right_arm_deg\n"
        "1,1,0,0,0,0\n"
        "1,2,5,5,0,0\n"
        "3,1,2,4,90,0\n");
    EXPECT_TRUE(visitors_at(s, 0.5).empty());
    auto mid = visitors_at(s, 2.0);
    ASSERT_EQ(mid.size(), 2u);
    EXPECT_DOUBLE_EQ(mid[0].x, 1.0);
    EXPECT_DOUBLE_EQ(mid[0].y, 2.0);
    EXPECT_DOUBLE_EQ(mid[0].left_arm, deg2rad(45));
    EXPECT_EQ(mid[1].x, 5.0);  // absent from the next keyframe: holds
    auto end = visitors_at(s, 10.0);
    ASSERT_EQ(end.size(), 1u);
    EXPECT_EQ(end[0].x, 2.0);
}

TEST(Run, EmptyScenarioSleepsWithoutMoving) {
    auto log = run_scenario(load_scenario_file(data_path("scenarios/empty.csv")), kCfg, 60.0, "empty");
    ASSERT_EQ(log.records.size(), 6001u);
    for (const auto& r : log.records) {
        ASSERT_EQ(r.mode, Mode::Sleep);
        ASSERT_EQ(r.base, BaseState{});
        ASSERT_EQ(r.waist, 0.0);
    }
    auto rep = emit_report(log);
    EXPECT_EQ(rep.greets, 0);
    EXPECT_EQ(rep.clamped_commands, 0);
    EXPECT_EQ(rep.distance_traveled, 0.0);
    EXPECT_TRUE(rep.breaches.empty());
}

TEST(Run, MuseumModeSequence) {
    auto e = mode_entries(museum_log());
    std::vector<Mode> modes;
    for (const auto& [t, m] : e) modes.push_back(m);
    EXPECT_EQ(modes, (std::vector{Mode::Sleep, Mode::Greet, Mode::Bow, Mode::MirrorTrack, Mode::Sleep}));
    ASSERT_EQ(e.size(), 5u);
    EXPECT_NEAR(e[2].first - e[1].first, kCfg.behavior.greet_duration, 1e-9);
    EXPECT_NEAR(e[3].first - e[2].first, kCfg.behavior.bow_duration, 1e-9);
    auto rep = emit_report(museum_log());
    EXPECT_EQ(rep.greets, 1);
    EXPECT_EQ(rep.dances, 0);
    EXPECT_GT(rep.turret_rotation, 0.0);
    EXPECT_EQ(rep.distance_traveled, 0.0);  // museum mode keeps the base in place
}

TEST(Run, MuseumMirrorsRaisedArm) {
    // Visitor raises the left arm 45 deg at t = 14 s; the robot's right arm follows.
    const auto& log = museum_log();
    const auto& r = log.records[1600];
    ASSERT_EQ(r.t_ms, 16000);
    EXPECT_EQ(r.mode, Mode::MirrorTrack);
    EXPECT_NEAR(r.command.right.q_abd, deg2rad(45), 1e-12);
    EXPECT_NEAR(r.right.q_abd, deg2rad(45), deg2rad(2));
    EXPECT_EQ(r.command.left.q_abd, 0.0);
}

TEST(Run, MuseumMatchesGolden) {
    std::string golden = read_text_file(quori::test::golden_path("museum_demo_commands.csv"));
    EXPECT_EQ(format_command_log(museum_log()), golden);
}

TEST(Run, Deterministic) {
    auto scn = load_scenario_file(data_path("scenarios/crowd.csv"));
    auto a = run_scenario(scn, kCfg, 60.0, "crowd");
    auto b = run_scenario(scn, kCfg, 60.0, "crowd");
    EXPECT_EQ(format_command_log(a), format_command_log(b));
    EXPECT_EQ(format_state_log(a), format_state_log(b));
}

TEST(Run, ShippedScenariosStayWithinLimits) {
    for (const char* name : {"museum_demo", "empty", "crowd"}) {
        for (bool free_roam : {false, true}) {
            PlatformConfig cfg = kCfg;
            cfg.behavior.free_roam = free_roam;
            auto log = run_scenario(load_scenario_file(data_path(std::string("scenarios/") + name + ".csv")),
                                    cfg, 90.0, name);
            auto rep = emit_report(log);
            EXPECT_TRUE(rep.breaches.empty()) << name << " " << free_roam;
            EXPECT_LE(rep.max_waist_torque, cfg.waist.torque_bound) << name;
            EXPECT_EQ(rep.slip_events, 0) << name;
        }
    }
}

TEST(Run, CrowdGreetsEachVisitorOncePerCooldown) {
    auto log = run_scenario(load_scenario_file(data_path("scenarios/crowd.csv")), kCfg, 90.0, "crowd");
    std::map<int, std::vector<double>> greets;
    for (size_t i = 0; i < log.records.size(); ++i) {
        const auto& r = log.records[i];
        if (r.mode == Mode::Greet && (i == 0 || log.records[i - 1].mode != Mode::Greet ||
                                      log.records[i - 1].engaged != r.engaged))
            greets[*r.engaged].push_back(r.t_ms / 1000.0);
    }
    EXPECT_FALSE(greets.empty());
    for (const auto& [id, ts] : greets)
        for (size_t k = 1; k < ts.size(); ++k) EXPECT_GE(ts[k] - ts[k - 1], kCfg.behavior.greet_cooldown) << id;
    EXPECT_GE(emit_report(log).dances, 1);
}

TEST(Run, FreeRoamFollowsVisitor) {
    PlatformConfig cfg = kCfg;
    cfg.behavior.free_roam = true;
    auto log = run_scenario(load_scenario_file(data_path("scenarios/museum_demo.csv")), cfg, 30.0);
    auto rep = emit_report(log);
    EXPECT_GT(rep.distance_traveled, 0.1);
    EXPECT_TRUE(rep.breaches.empty());
}

TEST(Report, FlagsInjectedBreach) {
    RunLog log = museum_log();
    log.records[100].command.turret_rate = 4.0;
    log.records[200].torque.inertial = 5.0;
    auto rep = emit_report(log);
    ASSERT_EQ(rep.breaches.size(), 2u);
    EXPECT_NE(rep.breaches[0].find("t=1.000 turret_rate"), std::string::npos);
    EXPECT_NE(rep.breaches[1].find("waist torque"), std::string::npos);
}

TEST(Logs, StateHeaderCarriesProvenance) {
    std::string s = format_state_log(museum_log());
    EXPECT_EQ(s.rfind("# scenario=museum_demo\n# config_hash=" + text::hex64(config_hash(kCfg)) +
                          "\n# seed=0\n# dt_s=0.010\n",
                      0),
              0u);
    std::string c = format_command_log(museum_log());
    EXPECT_EQ(c.rfind(std::string(kCommandLogHeader) + "\n0.000,Sleep,", 0), 0u);
}

TEST(Logs, WriteRunProducesAllFiles) {
    auto dir = std::filesystem::temp_directory_path() / "quori_write_run_test";
    std::filesystem::remove_all(dir);
    write_run(museum_log(), dir);
    for (const char* f : {"commands.csv", "state.csv", "report.txt", "report.csv"}) {
        EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
        EXPECT_FALSE(std::filesystem::exists(dir / (std::string(f) + ".tmp"))) << f;
    }
    EXPECT_EQ(read_text_file((dir / "commands.csv").string()), format_command_log(museum_log()));
    std::filesystem::remove_all(dir);
}

TEST(Run, RejectsBadTiming) {
    Scenario s = load_scenario_file(data_path("scenarios/empty.csv"));
    PlatformConfig cfg = kCfg;
    cfg.sim.dt = 0.0125;
    EXPECT_THROW(run_scenario(s, cfg, 1.0), validation_error);
    cfg.sim.dt = 0.02;
    EXPECT_EQ(run_scenario(s, cfg, 1.0).records.size(), 51u);
    EXPECT_THROW(run_scenario(s, kCfg, 0.0), validation_error);
}
