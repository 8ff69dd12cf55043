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

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "qfictl/cli/config.hpp"
#include "qfictl/cli/goldens.hpp"
#include "qfictl/cli/scenarios.hpp"

namespace fs = std::filesystem;
using namespace qfictl;
using namespace qfictl::cli;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

bool write_file(const fs::path &path, const std::string &content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
    return static_cast<bool>(out);
}

std::string utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct RunArgs {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    std::optional<std::string> format;
};

int run_command(const RunArgs &args) {
    ScenarioConfig cfg;
    std::string text;
    try {
        cfg = parse_config_file(args.config);
        std::ifstream in(args.config, std::ios::binary);
        text.assign(std::istreambuf_iterator<char>(in), {});
        if (args.seed) {
            cfg.seed = *args.seed;
        }
        if (args.format) {
            cfg.format = *args.format == "json" ? OutputFormat::Json : OutputFormat::Csv;
        }
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    const RunOptions opt{thread_budget(), 1.0};
    const auto t0 = std::chrono::steady_clock::now();
    const std::string started = utc_now();
    Table table;
    try {
        table = run_scenario(cfg, opt);
    } catch (const Error &e) {
        std::cerr << "numeric error [" << e.name() << "]: " << e.what() << "\n";
        return e.code() == ErrorCode::InvalidConfig ? kExitConfig : kExitNumeric;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::error_code ec;
    fs::create_directories(args.out, ec);
    const fs::path stem = fs::path(args.out) / cfg.output_stem();
    fs::path results = stem;
    results += cfg.format == OutputFormat::Csv ? ".csv" : ".json";
    const std::string body =
        cfg.format == OutputFormat::Csv ? render_csv(table) : table_json(table).dump(2) + "\n";
    fs::path sidecar = stem;
    sidecar += ".meta.json";
    const nlohmann::json meta = {
        {"version", kVersion},
        {"scenario", std::string(scenario_name(cfg.scenario))},
        {"config_path", args.config},
        {"config", config_json(cfg)},
        {"config_fnv1a", fnv1a_hex(text)},
        {"seed", cfg.seed},
        {"threads", opt.threads},
        {"started_utc", started},
        {"wall_time_seconds", wall},
        {"results", results.filename().string()},
        {"details", table.details},
    };
    for (const auto &[path, content] : {std::pair{results, body}, std::pair{sidecar, meta.dump(2) + "\n"}}) {
        if (!write_file(path, content)) {
            std::cerr << "cannot write " << path.string() << "\n";
            return kExitFailure;
        }
    }

    std::cout << scenario_name(cfg.scenario) << ": " << table.rows.size() << " rows -> " << results.string() << " ("
              << wall << " s)\n";
    return kExitOk;
}

int verify_command(const std::string &dir, bool regenerate, double step_scale) {
    GoldenReport report;
    try {
        report = verify_goldens(dir, {thread_budget(), step_scale, regenerate});
    } catch (const std::exception &e) {
        std::cerr << "cannot load goldens from " << dir << ": " << e.what() << "\n";
        return kExitConfig;
    }
    for (const GoldenFailure &f : report.failures) {
        std::cout << "FAIL " << f.golden << ": " << f.what << "\n";
    }
    std::cout << (regenerate ? "regenerated " : "checked ") << report.checked.size() << " goldens, "
              << report.failures.size() << " failures\n";
    return report.ok() ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"qfictl: time-dependent quantum parameter estimation scenarios"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    RunArgs run;
    auto *run_cmd = app.add_subcommand("run", "Run the scenario described by a config file");
    run_cmd->add_option("config", run.config, "Scenario config (key = value lines)")->required();
    run_cmd->add_option("--out", run.out, "Output directory");
    run_cmd->add_option("--seed", run.seed, "Override the RNG seed");
    run_cmd->add_option("--format", run.format, "Output format")->check(CLI::IsMember({"csv", "json"}));

    std::string golden_dir = "goldens";
    bool regenerate = false;
    double step_scale = 1.0;
    auto *verify_cmd = app.add_subcommand("verify-goldens", "Rerun the golden corpus and diff within tolerances");
    verify_cmd->add_option("--dir", golden_dir, "Golden directory");
    verify_cmd->add_flag("--regenerate", regenerate, "Rewrite the expected outputs");
    verify_cmd->add_option("--step-scale", step_scale, "Scale every grid size (degradation check)")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitConfig;
    }

    if (*run_cmd) {
        return run_command(run);
    }
    return verify_command(golden_dir, regenerate, step_scale);
}
