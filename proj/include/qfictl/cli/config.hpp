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

#pragma once

// Flat key=value scenario files.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qfictl/models.hpp"

namespace qfictl::cli {

enum class Scenario {
    UpperBoundSweep,
    NoControlSweep,
    ControlledQFI,
    ExpansionFit,
    FrameInvariance,
    AdaptiveRun,
    AppendixADemo,
};

enum class OutputFormat { Csv, Json };

inline constexpr std::string_view scenario_name(Scenario s) {
    switch (s) {
        case Scenario::UpperBoundSweep:
            return "UpperBoundSweep";
        case Scenario::NoControlSweep:
            return "NoControlSweep";
        case Scenario::ControlledQFI:
            return "ControlledQFI";
        case Scenario::ExpansionFit:
            return "ExpansionFit";
        case Scenario::FrameInvariance:
            return "FrameInvariance";
        case Scenario::AdaptiveRun:
            return "AdaptiveRun";
        case Scenario::AppendixADemo:
            return "AppendixADemo";
    }
    return "?";
}

/// Bad input file. `line` is 0 when the problem is not tied to a line.
class ConfigError : public std::runtime_error {
   public:
    ConfigError(std::string source, int line, const std::string &msg)
        : std::runtime_error(format(source, line, msg)), source_(std::move(source)), line_(line) {}

    int line() const noexcept {
        return line_;
    }
    const std::string &source() const noexcept {
        return source_;
    }

   private:
    static std::string format(const std::string &source, int line, const std::string &msg) {
        return line > 0 ? source + ":" + std::to_string(line) + ": " + msg : source + ": " + msg;
    }
    std::string source_;
    int line_;
};

struct ConfigEntry {
    std::string key;
    std::string value;
    int line = 0;
};

struct ScenarioConfig {
    Scenario scenario = Scenario::ControlledQFI;
    Estimand estimand = Estimand::Frequency;
    double B = 1.0;
    double omega = 1.0;
    std::vector<double> T;
    std::vector<int> boundary_n;
    std::optional<std::size_t> steps;
    double density = 1000.0;  ///< steps per unit time when `steps` is absent
    double detuning = 0.0;    ///< g_c - g
    std::vector<double> detunings;
    int degree = 2;
    std::optional<double> g_c0;
    std::size_t shots = 10000;
    std::size_t rounds = 5;
    std::size_t runs = 1;
    std::uint64_t seed = 0;
    double formal_T = 2.0;
    std::size_t formal_steps = 200000;
    std::string output;
    OutputFormat format = OutputFormat::Csv;

    std::string source;
    std::vector<ConfigEntry> entries;

    /// Value of the estimated parameter g.
    double parameter() const noexcept {
        return estimand == Estimand::Frequency ? omega : B;
    }
    RotatingFieldConfig model_config() const noexcept {
        return {B, omega, estimand};
    }
    std::size_t steps_for(double t_end, double scale = 1.0) const {
        const double base = steps ? static_cast<double>(*steps) : std::ceil(density * t_end);
        return static_cast<std::size_t>(std::max(10.0, std::round(base * scale)));
    }
    std::string output_stem() const {
        if (!output.empty()) {
            return output;
        }
        std::string s(scenario_name(scenario));
        for (char &c : s) {
            c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
        return s;
    }
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

struct KeySpec {
    std::set<Scenario> scenarios;  ///< empty: valid for all
};

inline const std::map<std::string, KeySpec, std::less<>> &key_table() {
    using S = Scenario;
    static const std::map<std::string, KeySpec, std::less<>> table = {
        {"scenario", {}},
        {"estimand", {}},
        {"B", {}},
        {"omega", {}},
        {"output", {}},
        {"format", {}},
        {"steps", {}},
        {"density", {}},
        {"T", {{S::UpperBoundSweep, S::NoControlSweep, S::ControlledQFI, S::ExpansionFit, S::FrameInvariance,
                S::AdaptiveRun}}},
        {"boundary_n", {{S::FrameInvariance, S::AppendixADemo}}},
        {"detuning", {{S::FrameInvariance, S::AppendixADemo}}},
        {"detunings", {{S::ControlledQFI, S::ExpansionFit}}},
        {"degree", {{S::ExpansionFit}}},
        {"g_c0", {{S::AdaptiveRun}}},
        {"shots", {{S::AdaptiveRun}}},
        {"rounds", {{S::AdaptiveRun}}},
        {"runs", {{S::AdaptiveRun}}},
        {"seed", {{S::AdaptiveRun}}},
        {"formal_T", {{S::AppendixADemo}}},
        {"formal_steps", {{S::AppendixADemo}}},
    };
    return table;
}

class Reader {
   public:
    Reader(const std::string &source, const ConfigEntry &e) : source_(source), e_(e) {}

    [[noreturn]] void fail(const std::string &msg) const {
        throw ConfigError(source_, e_.line, e_.key + ": " + msg);
    }

    double real() const {
        return parse_real(e_.value);
    }
    std::vector<double> reals() const {
        std::vector<double> out;
        for (const std::string &item : split()) {
            out.push_back(parse_real(item));
        }
        return out;
    }
    std::uint64_t unsigned_int() const {
        return parse_unsigned(e_.value);
    }
    std::vector<int> ints() const {
        std::vector<int> out;
        for (const std::string &item : split()) {
            const std::uint64_t v = parse_unsigned(item);
            if (v > 1000000) {
                fail("value too large");
            }
            out.push_back(static_cast<int>(v));
        }
        return out;
    }

   private:
    std::vector<std::string> split() const {
        std::vector<std::string> out;
        std::stringstream ss(e_.value);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) {
                fail("empty list element");
            }
            out.push_back(item);
        }
        if (out.empty()) {
            fail("empty list");
        }
        return out;
    }
    double parse_real(const std::string &s) const {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size()) {
            fail("not a number: '" + s + "'");
        }
        if (!std::isfinite(v)) {
            fail("must be finite");
        }
        return v;
    }
    std::uint64_t parse_unsigned(const std::string &s) const {
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size()) {
            fail("not a non-negative integer: '" + s + "'");
        }
        return v;
    }

    const std::string &source_;
    const ConfigEntry &e_;
};

inline std::optional<Scenario> scenario_from_name(std::string_view name) {
    for (Scenario s : {Scenario::UpperBoundSweep, Scenario::NoControlSweep, Scenario::ControlledQFI,
                       Scenario::ExpansionFit, Scenario::FrameInvariance, Scenario::AdaptiveRun,
                       Scenario::AppendixADemo}) {
        if (scenario_name(s) == name) {
            return s;
        }
    }
    return std::nullopt;
}

}  // namespace detail

inline std::vector<ConfigEntry> tokenize_config(std::istream &in, const std::string &source) {
    std::vector<ConfigEntry> entries;
    std::map<std::string, int> seen;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string text = detail::trim(std::string_view(raw).substr(0, hash));
        if (text.empty()) {
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(source, line, "expected key = value");
        }
        ConfigEntry e{detail::trim(std::string_view(text).substr(0, eq)),
                      detail::trim(std::string_view(text).substr(eq + 1)), line};
        if (e.key.empty()) {
            throw ConfigError(source, line, "missing key");
        }
        if (e.value.empty()) {
            throw ConfigError(source, line, e.key + ": missing value");
        }
        if (!detail::key_table().contains(e.key)) {
            throw ConfigError(source, line, "unknown key '" + e.key + "'");
        }
        if (auto it = seen.find(e.key); it != seen.end()) {
            throw ConfigError(source, line,
                              "duplicate key '" + e.key + "' (first set on line " + std::to_string(it->second) + ")");
        }
        seen.emplace(e.key, line);
        entries.push_back(std::move(e));
    }
    return entries;
}

inline ScenarioConfig parse_config(std::istream &in, const std::string &source) {
    ScenarioConfig cfg;
    cfg.source = source;
    cfg.entries = tokenize_config(in, source);

    const ConfigEntry *scenario_entry = nullptr;
    for (const ConfigEntry &e : cfg.entries) {
        if (e.key == "scenario") {
            scenario_entry = &e;
        }
    }
    if (!scenario_entry) {
        throw ConfigError(source, 0, "missing required key 'scenario'");
    }
    const auto scenario = detail::scenario_from_name(scenario_entry->value);
    if (!scenario) {
        throw ConfigError(source, scenario_entry->line, "scenario: unknown scenario '" + scenario_entry->value + "'");
    }
    cfg.scenario = *scenario;

    std::map<std::string, int> lines;
    for (const ConfigEntry &e : cfg.entries) {
        const detail::Reader r(source, e);
        const auto &spec = detail::key_table().find(e.key)->second;
        if (!spec.scenarios.empty() && !spec.scenarios.contains(cfg.scenario)) {
            r.fail("not used by scenario " + std::string(scenario_name(cfg.scenario)));
        }
        lines[e.key] = e.line;
        if (e.key == "scenario") {
            continue;
        } else if (e.key == "estimand") {
            if (e.value == "frequency") {
                cfg.estimand = Estimand::Frequency;
            } else if (e.value == "amplitude") {
                cfg.estimand = Estimand::Amplitude;
            } else {
                r.fail("expected 'frequency' or 'amplitude'");
            }
        } else if (e.key == "B") {
            cfg.B = r.real();
            if (cfg.B <= 0.0) {
                r.fail("must be > 0");
            }
        } else if (e.key == "omega") {
            cfg.omega = r.real();
        } else if (e.key == "output") {
            if (e.value.find_first_of("/\\") != std::string::npos) {
                r.fail("must be a file stem, not a path");
            }
            cfg.output = e.value;
        } else if (e.key == "format") {
            if (e.value == "csv") {
                cfg.format = OutputFormat::Csv;
            } else if (e.value == "json") {
                cfg.format = OutputFormat::Json;
            } else {
                r.fail("expected 'csv' or 'json'");
            }
        } else if (e.key == "steps") {
            const std::uint64_t n = r.unsigned_int();
            if (n < 10) {
                r.fail("must be >= 10");
            }
            if (n > 10000000) {
                r.fail("must be <= 10000000");
            }
            cfg.steps = static_cast<std::size_t>(n);
        } else if (e.key == "density") {
            cfg.density = r.real();
            if (cfg.density <= 0.0) {
                r.fail("must be > 0");
            }
        } else if (e.key == "T") {
            cfg.T = r.reals();
            for (double t : cfg.T) {
                if (t <= 0.0) {
                    r.fail("times must be > 0");
                }
            }
        } else if (e.key == "boundary_n") {
            cfg.boundary_n = r.ints();
            for (int n : cfg.boundary_n) {
                if (n < 1) {
                    r.fail("must be >= 1");
                }
            }
        } else if (e.key == "detuning") {
            cfg.detuning = r.real();
        } else if (e.key == "detunings") {
            cfg.detunings = r.reals();
        } else if (e.key == "degree") {
            const std::uint64_t d = r.unsigned_int();
            if (d < 1 || d > 6) {
                r.fail("must be between 1 and 6");
            }
            cfg.degree = static_cast<int>(d);
        } else if (e.key == "g_c0") {
            cfg.g_c0 = r.real();
        } else if (e.key == "shots" || e.key == "rounds" || e.key == "runs") {
            const std::uint64_t n = r.unsigned_int();
            if (n < 1) {
                r.fail("must be >= 1");
            }
            if (n > 100000000) {
                r.fail("too large");
            }
            (e.key == "shots" ? cfg.shots : e.key == "rounds" ? cfg.rounds : cfg.runs) = static_cast<std::size_t>(n);
        } else if (e.key == "seed") {
            cfg.seed = r.unsigned_int();
        } else if (e.key == "formal_steps") {
            const std::uint64_t n = r.unsigned_int();
            if (n < 10 || n > 10000000) {
                r.fail("must be between 10 and 10000000");
            }
            cfg.formal_steps = static_cast<std::size_t>(n);
        } else if (e.key == "formal_T") {
            cfg.formal_T = r.real();
            if (cfg.formal_T <= 0.0) {
                r.fail("must be > 0");
            }
        }
    }

    auto require = [&](const char *key) {
        if (!lines.contains(key)) {
            throw ConfigError(source, scenario_entry->line,
                              "scenario " + std::string(scenario_name(cfg.scenario)) + " requires key '" + key + "'");
        }
    };
    auto fail_at = [&](const char *key, const std::string &msg) {
        throw ConfigError(source, lines.contains(key) ? lines[key] : scenario_entry->line, std::string(key) + ": " + msg);
    };
    auto frequency_only = [&]() {
        if (cfg.estimand != Estimand::Frequency) {
            fail_at("estimand", "scenario " + std::string(scenario_name(cfg.scenario)) + " needs estimand = frequency");
        }
    };
    auto single_T = [&]() {
        if (cfg.T.size() != 1) {
            fail_at("T", "scenario " + std::string(scenario_name(cfg.scenario)) + " takes a single time");
        }
    };

    switch (cfg.scenario) {
        case Scenario::UpperBoundSweep:
            require("T");
            break;
        case Scenario::ControlledQFI:
            require("T");
            if (cfg.detunings.empty()) {
                cfg.detunings = {0.0};
            }
            break;
        case Scenario::NoControlSweep:
            require("T");
            frequency_only();
            break;
        case Scenario::ExpansionFit:
            require("T");
            require("detunings");
            frequency_only();
            single_T();
            if (cfg.detunings.size() < static_cast<std::size_t>(cfg.degree) + 2) {
                fail_at("detunings", "need at least degree + 2 points");
            }
            for (double d : cfg.detunings) {
                if (std::abs(d) * cfg.T[0] > 0.1) {
                    fail_at("detunings", "|detuning| * T must not exceed 0.1");
                }
            }
            break;
        case Scenario::FrameInvariance:
            frequency_only();
            if (cfg.T.empty() == cfg.boundary_n.empty()) {
                fail_at("T", "give exactly one of T or boundary_n");
            }
            if (cfg.omega + cfg.detuning == 0.0) {
                fail_at("detuning", "control frequency omega + detuning must be nonzero");
            }
            break;
        case Scenario::AdaptiveRun:
            require("T");
            require("g_c0");
            single_T();
            break;
        case Scenario::AppendixADemo:
            frequency_only();
            if (!lines.contains("detuning")) {
                cfg.detuning = 0.1;
            }
            if (cfg.boundary_n.empty()) {
                cfg.boundary_n = {1};
            }
            if (cfg.boundary_n.size() != 1) {
                fail_at("boundary_n", "AppendixADemo takes a single boundary index");
            }
            if (cfg.omega + cfg.detuning == 0.0) {
                fail_at("detuning", "control frequency omega + detuning must be nonzero");
            }
            break;
    }
    return cfg;
}

inline ScenarioConfig parse_config_string(const std::string &text, const std::string &source = "<string>") {
    std::istringstream in(text);
    return parse_config(in, source);
}

inline ScenarioConfig parse_config_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path, 0, "cannot open config file");
    }
    return parse_config(in, path);
}

/// 64-bit FNV-1a, used to tie goldens to the exact config text.
inline std::uint64_t fnv1a(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string fnv1a_hex(std::string_view data) {
    static constexpr char digits[] = "0123456789abcdef";
    std::uint64_t h = fnv1a(data);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    }
    return out;
}

}  // namespace qfictl::cli
