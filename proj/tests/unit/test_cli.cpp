#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "outformation/cli.hpp"
#include "outformation/experiments.hpp"
#include "outformation/timeline_svg.hpp"

using namespace outformation;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("outformation_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    std::string emit(const std::string& preset) {
        const auto file = path(preset + ".json");
        EXPECT_EQ(run_cli({"scenario", "--preset", preset, "--emit", file}).code, cli::kOk);
        return file;
    }

    fs::path dir_;
};

}  // namespace

TEST_F(CliTest, ScenarioEmitRefusesOverwriteWithoutForce) {
    const auto file = emit("fig_event");
    const auto s = scenario_from_json(nlohmann::json::parse(slurp(file)));
    EXPECT_EQ(s.config, experiments::preset("fig_event").config);

    const auto again = run_cli({"scenario", "--preset", "setup1", "--emit", file});
    EXPECT_EQ(again.code, cli::kOverwrite);
    EXPECT_NE(again.err.find("refusing to overwrite"), std::string::npos);
    EXPECT_EQ(run_cli({"scenario", "--preset", "setup1", "--emit", file, "--force"}).code, cli::kOk);
    EXPECT_EQ(scenario_from_json(nlohmann::json::parse(slurp(file))).config, experiments::preset("setup1").config);
}

TEST_F(CliTest, UnknownPresetIsUsageError) {
    EXPECT_EQ(run_cli({"scenario", "--preset", "bogus", "--emit", path("x.json")}).code, cli::kUsage);
    EXPECT_EQ(run_cli({}).code, cli::kUsage);
    EXPECT_EQ(run_cli({"--help"}).code, cli::kOk);
}

TEST_F(CliTest, SimulateWritesOneMetricsRowPerReplicationAndArchitecture) {
    const auto cfg = emit("fig_event");
    const auto r = run_cli({"simulate", "--config", cfg, "--arch", "in0,in_eps,out_eps", "--reps", "10", "--out",
                            path("sim")});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    EXPECT_EQ(line_count(slurp(path("sim") + "/metrics.csv")), 1u + 30u);
    std::ifstream events(path("sim") + "/events.csv");
    const auto rows = cli::read_events_csv(events);
    EXPECT_FALSE(rows.empty());
    for (const auto& row : rows) EXPECT_LT(row.replication, 10u);
}

TEST_F(CliTest, SimulateIsByteIdenticalAcrossRuns) {
    const auto cfg = emit("sweep");
    ASSERT_EQ(run_cli({"simulate", "--config", cfg, "--reps", "5", "--seed", "9", "--out", path("a"), "--svg"}).code,
              cli::kOk);
    ASSERT_EQ(run_cli({"simulate", "--config", cfg, "--reps", "5", "--seed", "9", "--out", path("b"), "--svg"}).code,
              cli::kOk);
    for (const char* f : {"events.csv", "metrics.csv", "timeline_in_eps.svg", "timeline_out_eps.svg"})
        EXPECT_EQ(slurp(path("a") + "/" + f), slurp(path("b") + "/" + f)) << f;
    ASSERT_EQ(run_cli({"simulate", "--config", cfg, "--reps", "5", "--seed", "10", "--out", path("c")}).code, cli::kOk);
    EXPECT_NE(slurp(path("a") + "/events.csv"), slurp(path("c") + "/events.csv"));
}

TEST_F(CliTest, MalformedJsonReportsLocation) {
    const auto file = path("bad.json");
    std::ofstream(file) << "{\"n\": 3,\n  \"delta_t\": }";
    const auto r = run_cli({"simulate", "--config", file, "--out", path("o")});
    EXPECT_EQ(r.code, cli::kUsage);
    EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
}

TEST_F(CliTest, InvalidConfigListsViolations) {
    auto s = experiments::preset("fig_event");
    auto j = to_json(s);
    j["d_low"] = -1.0;
    j["T_1"] = 25.0;
    const auto file = path("invalid.json");
    std::ofstream(file) << j.dump();
    const auto r = run_cli({"simulate", "--config", file, "--out", path("o")});
    EXPECT_EQ(r.code, cli::kUsage);
    EXPECT_NE(r.err.find("d_low must be positive"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("T_1 not a multiple of tau_1"), std::string::npos) << r.err;
}

TEST_F(CliTest, UnknownArchitectureAndTheorem) {
    const auto cfg = emit("setup1");
    EXPECT_EQ(run_cli({"simulate", "--config", cfg, "--arch", "out", "--out", path("o")}).code, cli::kUsage);
    EXPECT_EQ(run_cli({"verify", "--theorem", "nope", "--config", cfg, "--out", path("o")}).code, cli::kUsage);
}

TEST_F(CliTest, InfeasibleConditioningExitsWithFour) {
    auto s = experiments::preset("setup1");
    s.config.sigma = 0.0;
    s.config.epsilon = s.config.d_up + 1.0;
    const auto file = path("infeasible.json");
    std::ofstream(file) << to_json(s).dump();
    const auto r = run_cli({"verify", "--theorem", "power_shared", "--config", file, "--reps", "10", "--out", path("o")});
    EXPECT_EQ(r.code, cli::kConditioning);
    EXPECT_NE(r.err.find("conditioning infeasible"), std::string::npos);
}

TEST_F(CliTest, VerifyWritesReportAndCsv) {
    const auto cfg = emit("unshared");
    const auto r = run_cli({"verify", "--theorem", "mse_unshared", "--config", cfg, "--reps", "20", "--out", path("v")});
    EXPECT_EQ(r.code, cli::kOk) << r.out << r.err;
    const auto j = nlohmann::json::parse(slurp(path("v") + "/verify_mse_unshared.json"));
    EXPECT_EQ(j.at("n_samples"), 20);
    EXPECT_EQ(slurp(path("v") + "/theory.csv").rfind("formula_id,", 0), 0u);
}

TEST_F(CliTest, RenderFromCsvMatchesSimulateSvg) {
    const auto cfg = emit("fig_event");
    ASSERT_EQ(run_cli({"simulate", "--config", cfg, "--reps", "2", "--out", path("s"), "--svg"}).code, cli::kOk);
    const auto r = run_cli({"render", "--events", path("s") + "/events.csv", "--config", cfg, "--arch", "out_eps",
                            "--out", path("r.svg")});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    EXPECT_EQ(slurp(path("r.svg")), slurp(path("s") + "/timeline_out_eps.svg"));
}

TEST_F(CliTest, RenderOfMissingReplicationFails) {
    const auto cfg = emit("fig_event");
    ASSERT_EQ(run_cli({"simulate", "--config", cfg, "--reps", "1", "--out", path("s")}).code, cli::kOk);
    const auto r = run_cli({"render", "--events", path("s") + "/events.csv", "--config", cfg, "--replication", "7",
                            "--out", path("r.svg")});
    EXPECT_EQ(r.code, cli::kRuntime);
    EXPECT_NE(r.err.find("empty trace"), std::string::npos);
}

TEST(TimelineSvg, SingleTransferRamp) {
    const auto pts = cli::cumulative_staircase({{10.0, 1}}, 1.5, 0.0, 20.0);
    ASSERT_EQ(pts.size(), 4u);
    EXPECT_EQ(pts[0], cli::Point(0.0, 0.0));
    EXPECT_EQ(pts[1], cli::Point(10.0, 0.0));
    EXPECT_EQ(pts[2], cli::Point(11.5, 1.0));
    EXPECT_EQ(pts[3], cli::Point(20.0, 1.0));
    EXPECT_DOUBLE_EQ(cli::staircase_value(pts, 10.75), 0.5);
}

TEST(TimelineSvg, StaircaseIsMonotoneAndReachesTotal) {
    std::mt19937_64 rng(71);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::pair<double, int>> tr;
        int total = 0;
        for (int i = 0; i < 8; ++i) {
            const int m = 1 + static_cast<int>(rng() % 3);
            tr.emplace_back(std::uniform_real_distribution<double>(0.0, 90.0)(rng), m);
            total += m;
        }
        const auto pts = cli::cumulative_staircase(tr, 1.0, 0.0, 100.0);
        for (std::size_t i = 1; i < pts.size(); ++i) {
            EXPECT_LE(pts[i - 1].first, pts[i].first);
            EXPECT_LE(pts[i - 1].second, pts[i].second + 1e-12);
        }
        EXPECT_NEAR(pts.back().second, total, 1e-9);
    }
}

TEST(TimelineSvg, EmptyTraceThrows) {
    cli::TimelinePlotSpec spec;
    try {
        cli::render_timeline_svg(spec);
        FAIL() << "expected invalid_argument";
    } catch (const std::invalid_argument& e) {
        EXPECT_STREQ(e.what(), "empty trace");
    }
}

TEST(TimelineSvg, CancelMarkersAndColors) {
    cli::TimelinePlotSpec spec;
    spec.events = {
        {20.0, EventClass::BackoffFire, 1, TraceKind::UplinkSend, {1}, {0.5}, 20.0},
        {21.0, EventClass::UplinkArrival, kCentral, TraceKind::BroadcastSend, {1}, {0.5}, 20.0},
        {22.0, EventClass::BroadcastArrival, 2, TraceKind::Cancel, {1}, {0.4}, 0.0},
    };
    const auto svg = cli::render_timeline_svg(spec);
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("#1f77b4"), std::string::npos);
    EXPECT_NE(svg.find("#d62728"), std::string::npos);
    EXPECT_NE(svg.find("class=\"cancel\""), std::string::npos);
}
