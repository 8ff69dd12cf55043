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


#include "qfictl/cli/goldens.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "json.hpp"

namespace fs = std::filesystem;
using namespace qfictl::cli;

namespace {

const fs::path kSource = QFICTL_SOURCE_DIR;

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t column_index(const CsvData &d, const std::string &name) {
    for (std::size_t i = 0; i < d.header.size(); ++i) {
        if (d.header[i] == name) {
            return i;
        }
    }
    ADD_FAILURE() << "no column " << name;
    return 0;
}

fs::path scratch_copy(const std::string &tag) {
    const fs::path dst = fs::temp_directory_path() / ("qfictl_goldens_" + tag);
    fs::remove_all(dst);
    fs::copy(kSource / "goldens", dst, fs::copy_options::recursive);
    return dst;
}

}  // namespace

TEST(Goldens, DefaultCorpusPasses) {
    const GoldenReport r = verify_goldens(kSource / "goldens", {2, 1.0, false});
    EXPECT_EQ(r.checked.size(), 7u);
    for (const auto &f : r.failures) {
        ADD_FAILURE() << f.golden << ": " << f.what;
    }
}

TEST(Goldens, CoarseStepsAreFlagged) {
    const GoldenReport r = verify_goldens(kSource / "goldens", {2, 0.1, false});
    ASSERT_FALSE(r.ok());
    std::set<std::string> hit;
    bool numeric = false;
    for (const auto &f : r.failures) {
        hit.insert(f.golden);
        numeric = numeric || f.what.find("column optimal_qfi") != std::string::npos;
    }
    EXPECT_TRUE(numeric);
    EXPECT_GE(hit.size(), 5u);
}

TEST(Goldens, QuarticBoundTableMatchesAnalyticColumn) {
    const CsvData d = parse_csv_string(slurp(kSource / "goldens" / "upper_bound_sweep.csv"));
    ASSERT_FALSE(d.rows.empty());
    const std::size_t got = column_index(d, "upper_bound_qfi");
    const std::size_t want = column_index(d, "analytic");
    for (const auto &row : d.rows) {
        const double a = std::stod(row[got]), b = std::stod(row[want]);
        EXPECT_NEAR(a, b, 1e-12 * b);
    }
}

TEST(Goldens, EveryColumnCarriesKnownTag) {
    const auto m = nlohmann::json::parse(slurp(kSource / "goldens" / "manifest.json"));
    std::set<std::string> vocab;
    for (const auto &t : m.at("provenance_tags")) {
        vocab.insert(t.get<std::string>());
    }
    EXPECT_EQ(vocab.size(), 3u);
    for (const auto &g : m.at("goldens")) {
        const CsvData d = parse_csv_string(slurp(kSource / "goldens" / g.at("expected").get<std::string>()));
        for (const std::string &col : d.header) {
            ASSERT_TRUE(g.at("columns").contains(col)) << g.at("name") << " " << col;
            EXPECT_TRUE(vocab.contains(g["columns"][col].at("provenance").get<std::string>()));
        }
    }
}

TEST(Goldens, EditedConfigIsFlagged) {
    const fs::path dir = scratch_copy("edited");
    std::ofstream(dir / "upper_bound_sweep.cfg", std::ios::app) << "# touched\n";
    const GoldenReport r = verify_goldens(dir, {1, 1.0, false});
    ASSERT_EQ(r.failures.size(), 1u);
    EXPECT_EQ(r.failures[0].golden, "upper_bound_sweep");
    fs::remove_all(dir);
}

TEST(Goldens, RegenerateOnlyWhenAsked) {
    const fs::path dir = scratch_copy("regen");
    std::ofstream(dir / "no_control_sweep.csv", std::ios::binary) << "T,steps\n1,2\n";
    EXPECT_FALSE(verify_goldens(dir, {1, 1.0, false}).ok());
    EXPECT_NE(slurp(dir / "no_control_sweep.csv"), slurp(kSource / "goldens" / "no_control_sweep.csv"));
    EXPECT_TRUE(verify_goldens(dir, {1, 1.0, true}).ok());
    EXPECT_TRUE(verify_goldens(dir, {1, 1.0, false}).ok());
    EXPECT_EQ(slurp(dir / "no_control_sweep.csv"), slurp(kSource / "goldens" / "no_control_sweep.csv"));
    fs::remove_all(dir);
}

TEST(CompareCsv, ToleranceAndShape) {
    const CsvData a = parse_csv_string("# c\nx,y\n1,a\n");
    const CsvData b = parse_csv_string("x,y\n1.0000001,a\n");
    EXPECT_FALSE(compare_csv(a, b, {}).empty());
    EXPECT_TRUE(compare_csv(a, b, {{"x", {0.0, 1e-6, "t"}}}).empty());
    EXPECT_FALSE(compare_csv(a, parse_csv_string("x,y\n1,b\n"), {}).empty());
    EXPECT_FALSE(compare_csv(a, parse_csv_string("x,z\n1,a\n"), {}).empty());
    EXPECT_FALSE(compare_csv(a, parse_csv_string("x,y\n1,a\n2,b\n"), {}).empty());
}

// Theory map: every row names owning symbols that exist in include/, or is marked out of scope.
TEST(TheoryMap, EveryRowMapped) {
    std::string headers;
    for (const auto &e : fs::recursive_directory_iterator(kSource / "include")) {
        if (e.is_regular_file()) {
            headers += slurp(e.path());
        }
    }
    std::istringstream doc(slurp(kSource / "docs" / "theory_map.md"));
    const std::regex sym("`([A-Za-z_][A-Za-z0-9_:]*)`");
    std::string line;
    std::size_t rows = 0;
    while (std::getline(doc, line)) {
        if (line.rfind("| ", 0) != 0 || line.find("---") != std::string::npos || line.find("| Relation") == 0) {
            continue;
        }
        ++rows;
        std::vector<std::string> cells;
        std::stringstream ss(line.substr(1));
        std::string cell;
        while (std::getline(ss, cell, '|')) {
            cells.push_back(cell);
        }
        ASSERT_GE(cells.size(), 3u) << line;
        const std::string &owner = cells[2];
        if (owner.find("out of scope") != std::string::npos) {
            continue;
        }
        std::size_t found = 0;
        for (std::sregex_iterator it(owner.begin(), owner.end(), sym), end; it != end; ++it) {
            std::string name = (*it)[1];
            if (const auto p = name.rfind("::"); p != std::string::npos) {
                name = name.substr(p + 2);
            }
            EXPECT_TRUE(std::regex_search(headers, std::regex("\\b" + name + "\\b"))) << name << " in: " << line;
            ++found;
        }
        EXPECT_GT(found, 0u) << "unmapped row: " << line;
    }
    EXPECT_GE(rows, 50u);
}
