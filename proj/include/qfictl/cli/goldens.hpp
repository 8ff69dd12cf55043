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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qfictl/cli/config.hpp"
#include "qfictl/cli/scenarios.hpp"

namespace qfictl::cli {

struct ColumnTolerance {
    double abs = 0.0;
    double rel = 0.0;
    std::string provenance;
};

struct GoldenFailure {
    std::string golden;
    std::string what;
};

struct GoldenReport {
    std::vector<std::string> checked;
    std::vector<GoldenFailure> failures;

    bool ok() const noexcept {
        return failures.empty();
    }
};

struct GoldenOptions {
    std::size_t threads = 1;
    double step_scale = 1.0;
    bool regenerate = false;
};

struct CsvData {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline std::vector<std::string> split_csv_line(const std::string &line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

inline CsvData parse_csv(std::istream &in) {
    CsvData d;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line[0] == '#') {
            continue;
        }
        if (!have_header) {
            d.header = split_csv_line(line);
            have_header = true;
        } else {
            d.rows.push_back(split_csv_line(line));
        }
    }
    return d;
}

inline CsvData parse_csv_string(const std::string &text) {
    std::istringstream in(text);
    return parse_csv(in);
}

namespace detail {

inline bool parse_double(const std::string &s, double &v) {
    if (s.empty()) {
        return false;
    }
    char *end = nullptr;
    v = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

inline std::string read_file(const std::filesystem::path &p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + p.string());
    }
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace detail

/// Compares a fresh CSV against the stored one; returns one message per mismatch.
inline std::vector<std::string> compare_csv(const CsvData &expected, const CsvData &actual,
                                            const std::map<std::string, ColumnTolerance> &tol) {
    std::vector<std::string> out;
    if (expected.header != actual.header) {
        out.push_back("column set differs");
        return out;
    }
    if (expected.rows.size() != actual.rows.size()) {
        out.push_back("row count " + std::to_string(actual.rows.size()) + " != expected " +
                      std::to_string(expected.rows.size()));
        return out;
    }
    for (std::size_t r = 0; r < expected.rows.size(); ++r) {
        const auto &er = expected.rows[r];
        const auto &ar = actual.rows[r];
        if (er.size() != ar.size() || er.size() != expected.header.size()) {
            out.push_back("row " + std::to_string(r) + ": cell count differs");
            continue;
        }
        for (std::size_t c = 0; c < er.size(); ++c) {
            const std::string &col = expected.header[c];
            double e = 0.0, a = 0.0;
            bool same = false;
            if (detail::parse_double(er[c], e) && detail::parse_double(ar[c], a)) {
                const auto it = tol.find(col);
                const ColumnTolerance t = it == tol.end() ? ColumnTolerance{} : it->second;
                same = (std::isnan(e) && std::isnan(a)) || std::abs(a - e) <= t.abs + t.rel * std::abs(e);
            } else {
                same = er[c] == ar[c];
            }
            if (!same) {
                out.push_back("row " + std::to_string(r) + " column " + col + ": got " + ar[c] + ", expected " + er[c]);
            }
        }
    }
    return out;
}

/// Reruns every golden listed in `dir`/manifest.json and diffs the results within tolerance.
/// With `regenerate`, rewrites the expected CSVs and config hashes instead.
inline GoldenReport verify_goldens(const std::filesystem::path &dir, const GoldenOptions &opt = {}) {
    GoldenReport report;
    const std::filesystem::path manifest_path = dir / "manifest.json";
    nlohmann::json manifest = nlohmann::json::parse(detail::read_file(manifest_path));
    const auto &vocab = manifest.at("provenance_tags");
    auto known_tag = [&](const std::string &tag) {
        for (const auto &v : vocab) {
            if (v.get<std::string>() == tag) {
                return true;
            }
        }
        return false;
    };

    for (auto &entry : manifest.at("goldens")) {
        const std::string name = entry.at("name").get<std::string>();
        auto fail = [&](const std::string &what) { report.failures.push_back({name, what}); };
        report.checked.push_back(name);

        std::map<std::string, ColumnTolerance> tol;
        for (const auto &[col, spec] : entry.at("columns").items()) {
            ColumnTolerance t;
            t.abs = spec.value("abs", 0.0);
            t.rel = spec.value("rel", 0.0);
            t.provenance = spec.value("provenance", "");
            if (!known_tag(t.provenance)) {
                fail("column " + col + ": missing or unknown provenance tag '" + t.provenance + "'");
            }
            tol.emplace(col, t);
        }

        const std::filesystem::path cfg_path = dir / entry.at("config").get<std::string>();
        const std::filesystem::path csv_path = dir / entry.at("expected").get<std::string>();
        std::string actual;
        try {
            const std::string text = detail::read_file(cfg_path);
            const std::string hash = fnv1a_hex(text);
            if (opt.regenerate) {
                entry["config_fnv1a"] = hash;
            } else if (entry.value("config_fnv1a", "") != hash) {
                fail("config text changed since the golden was generated (fnv1a " + hash + ")");
            }
            const ScenarioConfig cfg = parse_config_string(text, cfg_path.string());
            actual = render_csv(run_scenario(cfg, {opt.threads, opt.step_scale}));
        } catch (const Error &e) {
            fail(std::string("run failed: ") + e.what());
            continue;
        } catch (const std::exception &e) {
            fail(std::string("run failed: ") + e.what());
            continue;
        }

        const CsvData got = parse_csv_string(actual);
        for (const std::string &col : got.header) {
            if (!tol.contains(col)) {
                fail("column " + col + " has no tolerance/provenance entry");
            }
        }
        if (opt.regenerate) {
            std::ofstream(csv_path, std::ios::binary) << actual;
            continue;
        }
        CsvData want;
        try {
            want = parse_csv_string(detail::read_file(csv_path));
        } catch (const std::exception &e) {
            fail(e.what());
            continue;
        }
        for (std::string &m : compare_csv(want, got, tol)) {
            fail(std::move(m));
        }
    }
    if (opt.regenerate) {
        std::ofstream(manifest_path, std::ios::binary) << manifest.dump(2) << "\n";
    }
    return report;
}

}  // namespace qfictl::cli
