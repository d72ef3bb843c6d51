#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "common.hpp"

using namespace rrap;

namespace {

std::string slurp(const std::string& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

std::vector<SimReport> smoke_rows() {
    const auto trace = read_trace_file(std::string(RRAP_SOURCE_DIR) + "/data/smoke_1k.trace");
    std::vector<SimReport> rows;
    for (const char* n : {"sram-baseline", "edram-baseline", "rrap"}) rows.push_back(run(trace, builtin_config(n), "smoke_1k"));
    return rows;
}

} // namespace

TEST(Report, LeakageOverOneMillisecond) {
    EXPECT_DOUBLE_EQ(leakage(3'000'000, 3e9, 104.797), 104797.0);
    Hierarchy h(builtin_config("rrap"));
    h.finish_at(3'000'000);
    EXPECT_DOUBLE_EQ(h.lrsc(0).energy().leakage_nj, 104797.0);
    EXPECT_DOUBLE_EQ(h.hrsc(0).energy().leakage_nj, 114915.0);
}

TEST(Report, CsvRoundTrip) {
    const auto rows = smoke_rows();
    const auto csv = emit_csv(rows, std::string("sram-baseline"));
    const auto back = parse_csv(csv);
    ASSERT_EQ(back.size(), rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_TRUE(back[i] == rows[i]) << rows[i].config;
    EXPECT_EQ(emit_csv(back, std::string("sram-baseline")), csv);
}

TEST(Report, GoldenSmokeCsv) {
    const auto trace = read_trace_file(std::string(RRAP_SOURCE_DIR) + "/data/smoke_1k.trace");
    const auto csv = emit_csv({run(trace, builtin_config("sram-baseline"), "smoke_1k")});
    EXPECT_EQ(csv, slurp(std::string(RRAP_SOURCE_DIR) + "/tests/golden/sram_baseline_smoke.csv"));
}

TEST(Report, NormalizesAgainstBaseline) {
    const auto rows = smoke_rows();
    const auto parsed = emit_csv(rows, std::string("sram-baseline"));
    std::istringstream in(parsed);
    std::string header, first;
    std::getline(in, header);
    std::getline(in, first);
    const auto cols = report_detail::csv_split(header, 1);
    const auto cells = report_detail::csv_split(first, 2);
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (cols[i].rfind("norm_", 0) == 0) {
            EXPECT_EQ(cells[i], "1") << cols[i];
        }
    }
    EXPECT_THROW(emit_csv(rows, std::string("missing")), ConfigError);
}

TEST(Report, RejectsMalformedCsv) {
    EXPECT_THROW(parse_csv("config,cycles\nx,1\n"), ParseError);
    auto csv = emit_csv(smoke_rows());
    csv += "a,b\n";
    EXPECT_THROW(parse_csv(csv), ParseError);
}

TEST(Report, CsvEscaping) {
    SimReport r;
    r.config = "odd,\"name\"";
    const auto back = parse_csv(emit_csv({r}));
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(back[0].config, r.config);
}

TEST(Report, JsonCarriesAllRuns) {
    const auto rows = smoke_rows();
    const auto j = nlohmann::json::parse(emit_json(rows, std::string("sram-baseline")));
    EXPECT_EQ(j["schema"], "rrap-sim report v1");
    ASSERT_EQ(j["runs"].size(), 3u);
    EXPECT_EQ(j["runs"][2]["config"], "rrap");
    EXPECT_DOUBLE_EQ(j["runs"][0]["normalized"]["l2_total_nj"].get<double>(), 1.0);
    EXPECT_DOUBLE_EQ(j["runs"][2]["l2_total_nj"].get<double>(), rows[2].l2_total_nj());
}

TEST(Report, DerivedTotals) {
    const auto rows = smoke_rows();
    for (const auto& r : rows) {
        EXPECT_EQ(r.total_dynamic(), r.l1.energy.category_sum() + r.l2.energy.category_sum() + r.llc.energy.category_sum());
        EXPECT_DOUBLE_EQ(r.l2_total_nj(), r.l2_dynamic().nj() + r.l2_leakage_nj());
    }
}

TEST(Report, ColumnNamesAreUnique) {
    const auto csv = emit_csv(smoke_rows(), std::string("sram-baseline"));
    const auto cols = report_detail::csv_split(csv.substr(0, csv.find('\n')), 1);
    std::set<std::string> seen;
    for (const auto& c : cols) EXPECT_TRUE(seen.insert(c).second) << "duplicate column " << c;
    const auto j = nlohmann::json::parse(emit_json(smoke_rows()));
    EXPECT_EQ(j["runs"][0]["l1.read_hits"], j["runs"][0]["l1_read_hits"]);
}
