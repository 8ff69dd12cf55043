// Copyright 2026 The qfictl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "qfictl/cli/config.hpp"
#include "qfictl/cli/scenarios.hpp"

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fs = std::filesystem;
using namespace qfictl::cli;

namespace {

const char *kMinimal =
    "scenario = ControlledQFI\n"
    "B = 1\n"
    "omega = 1\n"
    "T = 1, 2, 4, 8\n"
    "detunings = 0\n";

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

class CliRun : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("qfictl_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override {
        fs::remove_all(dir_);
    }

    fs::path write_config(const std::string &name, const std::string &text) {
        const fs::path p = dir_ / name;
        std::ofstream(p, std::ios::binary) << text;
        return p;
    }

    // exit status of the real binary
    int run(const std::string &args) {
        const std::string cmd = std::string("\"") + QFICTL_CLI_PATH + "\" " + args + " >\"" +
                                (dir_ / "stdout.txt").string() + "\" 2>\"" + (dir_ / "stderr.txt").string() + "\"";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string err() {
        return slurp(dir_ / "stderr.txt");
    }

    fs::path dir_;
};

}  // namespace

TEST(ParseConfig, MinimalControlledQfi) {
    const ScenarioConfig cfg = parse_config_string(kMinimal);
    EXPECT_EQ(cfg.scenario, Scenario::ControlledQFI);
    EXPECT_EQ(cfg.T, (std::vector<double>{1, 2, 4, 8}));
    EXPECT_DOUBLE_EQ(cfg.B, 1.0);
    EXPECT_FALSE(cfg.steps.has_value());
}

TEST(ParseConfig, CommentsAndWhitespace) {
    const ScenarioConfig cfg = parse_config_string(
        "# header\n\n  scenario=UpperBoundSweep   # trailing\nB = 2\n omega = 1\nT = 3\n");
    EXPECT_EQ(cfg.scenario, Scenario::UpperBoundSweep);
    EXPECT_DOUBLE_EQ(cfg.B, 2.0);
}

TEST(ParseConfig, StepsBelowMinimumRejected) {
    try {
        parse_config_string(std::string(kMinimal) + "steps = 5\n", "c.cfg");
        FAIL() << "steps = 5 accepted";
    } catch (const ConfigError &e) {
        EXPECT_NE(std::string(e.what()).find("c.cfg:6"), std::string::npos) << e.what();
        EXPECT_NE(std::string(e.what()).find("steps"), std::string::npos) << e.what();
    }
    EXPECT_NO_THROW(parse_config_string(std::string(kMinimal) + "steps = 10\n"));
}

TEST(ParseConfig, DuplicateKeyRejected) {
    try {
        parse_config_string(std::string(kMinimal) + "B = 2\n", "d.cfg");
        FAIL() << "duplicate key accepted";
    } catch (const ConfigError &e) {
        EXPECT_NE(std::string(e.what()).find("d.cfg:6"), std::string::npos) << e.what();
    }
}

TEST(ParseConfig, UnknownKeyRejected) {
    EXPECT_THROW(parse_config_string(std::string(kMinimal) + "colour = red\n"), ConfigError);
}

TEST(ParseConfig, KeyNotValidForScenarioRejected) {
    EXPECT_THROW(parse_config_string(std::string(kMinimal) + "shots = 100\n"), ConfigError);
}

TEST(ParseConfig, UnknownScenarioRejected) {
    EXPECT_THROW(parse_config_string("scenario = Bogus\nB = 1\nomega = 1\nT = 1\n"), ConfigError);
}

TEST(ParseConfig, NonFiniteAndMissingFieldsRejected) {
    EXPECT_THROW(parse_config_string("scenario = UpperBoundSweep\nB = nan\nomega = 1\nT = 1\n"), ConfigError);
    EXPECT_THROW(parse_config_string("scenario = UpperBoundSweep\nB = 1\nomega = inf\nT = 1\n"), ConfigError);
    EXPECT_THROW(parse_config_string("scenario = UpperBoundSweep\nB = 1\nomega = 1\n"), ConfigError);
    EXPECT_THROW(parse_config_string("scenario = AdaptiveRun\nB = 1\nomega = 1\nT = 2\n"), ConfigError);
}

TEST(ParseConfig, MissingFileIsConfigError) {
    EXPECT_THROW(parse_config_file("/nonexistent/qfictl.cfg"), ConfigError);
}

TEST(RunScenario, ControlledQfiMatchesQuarticLaw) {
    ScenarioConfig cfg = parse_config_string(std::string(kMinimal) + "density = 1000\n");
    const Table t = run_scenario(cfg, {2, 1.0});
    ASSERT_EQ(t.rows.size(), 4u);
    const double want[] = {1, 16, 256, 4096};
    std::size_t col = 0;
    while (t.columns[col].name != "optimal_qfi") {
        ++col;
    }
    for (std::size_t r = 0; r < 4; ++r) {
        EXPECT_NEAR(std::get<double>(t.rows[r][col]), want[r], 1e-6 * want[r]);
    }
}

TEST(RunScenario, NoControlRatioAtLongTime) {
    const ScenarioConfig cfg =
        parse_config_string("scenario = NoControlSweep\nB = 1\nomega = 1\nT = 50\ndensity = 200\n");
    const Table t = run_scenario(cfg);
    std::size_t col = 0;
    while (t.columns[col].name != "optimal_qfi") {
        ++col;
    }
    const double r = std::get<double>(t.rows[0][col]) / 2000.0;
    EXPECT_GE(r, 0.95);
    EXPECT_LE(r, 1.05);
}

TEST(RunScenario, ParallelAndSerialAgreeBytewise) {
    const ScenarioConfig cfg = parse_config_string(std::string(kMinimal) + "density = 200\n");
    EXPECT_EQ(render_csv(run_scenario(cfg, {1, 1.0})), render_csv(run_scenario(cfg, {4, 1.0})));
}

TEST(ParallelMap, KeepsOrderAndRethrows) {
    const auto v = parallel_map(50, 4, [](std::size_t i) { return i * i; });
    for (std::size_t i = 0; i < v.size(); ++i) {
        EXPECT_EQ(v[i], i * i);
    }
    EXPECT_THROW(parallel_map(8, 3,
                              [](std::size_t i) {
                                  if (i == 5) {
                                      throw std::runtime_error("boom");
                                  }
                                  return i;
                              }),
                 std::runtime_error);
}

TEST(FormatCell, SeventeenDigitsRoundTrip) {
    const double x = 0.1 + 0.2;
    EXPECT_EQ(std::stod(format_cell(Cell{x})), x);
    EXPECT_EQ(format_cell(Cell{std::int64_t{42}}), "42");
}

TEST_F(CliRun, WritesCsvAndSidecar) {
    const fs::path cfg = write_config("c.cfg", std::string(kMinimal) + "density = 200\n");
    ASSERT_EQ(run("run \"" + cfg.string() + "\" --out \"" + (dir_ / "out").string() + "\""), 0) << err();
    const std::string csv = slurp(dir_ / "out" / "controlledqfi.csv");
    EXPECT_EQ(csv.rfind("# qfictl", 0), 0u);
    EXPECT_NE(csv.find("#   optimal_qfi:"), std::string::npos);

    const auto meta = nlohmann::json::parse(slurp(dir_ / "out" / "controlledqfi.meta.json"));
    for (const char *k : {"version", "config", "seed", "wall_time_seconds", "started_utc", "config_fnv1a"}) {
        EXPECT_TRUE(meta.contains(k)) << k;
    }
    EXPECT_EQ(meta["scenario"], "ControlledQFI");
    EXPECT_EQ(meta["config"]["B"]["value"], "1");
}

TEST_F(CliRun, JsonFormatFlag) {
    const fs::path cfg = write_config("c.cfg", std::string(kMinimal) + "density = 200\n");
    ASSERT_EQ(run("run \"" + cfg.string() + "\" --format json --out \"" + dir_.string() + "\""), 0) << err();
    const auto j = nlohmann::json::parse(slurp(dir_ / "controlledqfi.json"));
    EXPECT_FALSE(j.empty());
}

TEST_F(CliRun, IdenticalConfigAndSeedGiveIdenticalCsv) {
    const fs::path cfg = write_config("a.cfg",
                                      "scenario = AdaptiveRun\nB = 1\nomega = 1\ng_c0 = 1.05\nT = 2\n"
                                      "steps = 200\nshots = 1000\nrounds = 3\nruns = 3\n");
    ASSERT_EQ(run("run \"" + cfg.string() + "\" --seed 99 --out \"" + (dir_ / "x").string() + "\""), 0) << err();
    ASSERT_EQ(run("run \"" + cfg.string() + "\" --seed 99 --out \"" + (dir_ / "y").string() + "\""), 0) << err();
    const std::string x = slurp(dir_ / "x" / "adaptiverun.csv");
    EXPECT_FALSE(x.empty());
    EXPECT_EQ(x, slurp(dir_ / "y" / "adaptiverun.csv"));
    ASSERT_EQ(run("run \"" + cfg.string() + "\" --seed 100 --out \"" + (dir_ / "z").string() + "\""), 0) << err();
    EXPECT_NE(x, slurp(dir_ / "z" / "adaptiverun.csv"));
}

TEST_F(CliRun, UnknownScenarioExitsTwo) {
    const fs::path cfg = write_config("b.cfg", "scenario = Bogus\n");
    EXPECT_EQ(run("run \"" + cfg.string() + "\""), 2);
    EXPECT_NE(err().find("b.cfg:1"), std::string::npos) << err();
}

TEST_F(CliRun, MissingFileExitsTwo) {
    EXPECT_EQ(run("run \"" + (dir_ / "absent.cfg").string() + "\""), 2);
}

TEST_F(CliRun, BadFlagExitsTwo) {
    const fs::path cfg = write_config("c.cfg", kMinimal);
    EXPECT_EQ(run("run \"" + cfg.string() + "\" --format xml"), 2);
}

TEST_F(CliRun, NumericFailureExitsThreeWithErrorName) {
    const fs::path cfg = write_config("n.cfg", "scenario = ControlledQFI\nB = 1\nomega = 1\nT = 8\nsteps = 10\n");
    EXPECT_EQ(run("run \"" + cfg.string() + "\" --out \"" + dir_.string() + "\""), 3);
    EXPECT_NE(err().find("StepTooCoarse"), std::string::npos) << err();
}
