#pragma once

// Simulation report: counters, energy ledgers, read service time, IPC proxy
// and DSI summary. The CSV and JSON renderers and the CSV reader all walk the
// same field list, so column order is fixed by visit_fields below.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "json.hpp"

#include "rrap/cache.hpp"
#include "rrap/dsi.hpp"
#include "rrap/energy.hpp"
#include "rrap/error.hpp"
#include "rrap/units.hpp"

namespace rrap {

struct ArraySummary {
    bool present = false;
    ArrayStats stats;
    EnergyLedger energy;

    friend bool operator==(const ArraySummary&, const ArraySummary&) = default;
};

struct SimReport {
    std::string config;
    std::string benchmark;
    std::string l2_variant;
    std::uint64_t cores = 0;

    std::uint64_t instructions = 0;
    std::uint64_t cycles = 0;
    bool ipc_available = false;
    double ipc = 0.0;

    std::uint64_t reads = 0, writes = 0;
    std::uint64_t l1_read_hits = 0, l1_read_misses = 0, l1_write_hits = 0, l1_write_misses = 0;
    std::uint64_t l2_read_probes = 0, l2_read_hits = 0, l2_read_misses = 0;
    std::uint64_t l2_write_probes = 0, l2_write_hits = 0;
    std::uint64_t lrsc_read_hits = 0, hrsc_read_hits = 0;
    double l2_read_miss_ratio = 0.0;
    std::uint64_t llc_read_probes = 0, llc_read_hits = 0, llc_write_probes = 0, llc_write_hits = 0;
    std::uint64_t memory_reads = 0, memory_writebacks = 0;

    std::uint64_t rst_total = 0;  // cycles, all reads
    double rst_mean = 0.0;
    std::uint64_t rst_l2 = 0;     // cycles, reads serviced by L2
    std::uint64_t l2_serviced_reads = 0;
    double rst_l2_mean = 0.0;
    std::uint64_t refresh_stall_cycles = 0, bank_stall_cycles = 0;

    std::uint64_t hrsc_admissions = 0, hrsc_evictions = 0, mispredictions = 0;

    std::uint64_t dsi_blocks = 0;
    double dsi_ideal_retention_s = 0.0;
    std::array<double, dsi::kBuckets> dsi_fractions{};

    // L2 = baseline array, or LRSC plus HRSC.
    ArraySummary l1, l2, lrsc, hrsc, llc;

    Energy l2_dynamic() const { return l2.energy.category_sum(); }
    double l2_leakage_nj() const { return l2.energy.leakage_nj; }
    double l2_total_nj() const { return l2.energy.total_nj(); }
    Energy total_dynamic() const {
        return l1.energy.category_sum() + l2.energy.category_sum() + llc.energy.category_sum();
    }
    double total_leakage_nj() const { return l1.energy.leakage_nj + l2.energy.leakage_nj + llc.energy.leakage_nj; }
    double total_nj() const { return total_dynamic().nj() + total_leakage_nj(); }

    friend bool operator==(const SimReport&, const SimReport&) = default;
};

inline double read_service_time(const SimReport& r) { return static_cast<double>(r.rst_total); }

inline std::optional<double> ipc_proxy(const SimReport& r) {
    if (!r.ipc_available) return std::nullopt;
    return r.ipc;
}

namespace report_detail {

template <typename A, typename F>
void visit_array(const std::string& p, A& a, F&& f) {
    f(p + "present", a.present);
    auto& s = a.stats;
    f(p + "read_hits", s.read_hits);
    f(p + "read_misses", s.read_misses);
    f(p + "write_hits", s.write_hits);
    f(p + "write_misses", s.write_misses);
    f(p + "fills", s.fills);
    f(p + "evictions", s.evictions);
    f(p + "dirty_evictions", s.dirty_evictions);
    f(p + "invalidations", s.invalidations);
    f(p + "refreshes", s.refreshes);
    f(p + "refresh_stall_cycles", s.refresh_stall_cycles);
    f(p + "bank_stall_cycles", s.bank_stall_cycles);
    for (std::size_t i = 0; i < kEnergyCategories; ++i)
        f(p + "n_" + std::string(kEnergyCategoryNames[i]), s.charges[i]);
    for (std::size_t i = 0; i < kEnergyCategories; ++i)
        f(p + "e_" + std::string(kEnergyCategoryNames[i]) + "_nj", a.energy.dynamic[i]);
    f(p + "e_running_total_nj", a.energy.running_total);
    f(p + "leakage_nj", a.energy.leakage_nj);
}

} // namespace report_detail

template <typename R, typename F>
void visit_fields(R& r, F&& f) {
    f("config", r.config);
    f("benchmark", r.benchmark);
    f("l2_variant", r.l2_variant);
    f("cores", r.cores);
    f("instructions", r.instructions);
    f("cycles", r.cycles);
    f("ipc_available", r.ipc_available);
    f("ipc", r.ipc);
    f("reads", r.reads);
    f("writes", r.writes);
    f("l1_read_hits", r.l1_read_hits);
    f("l1_read_misses", r.l1_read_misses);
    f("l1_write_hits", r.l1_write_hits);
    f("l1_write_misses", r.l1_write_misses);
    f("l2_read_probes", r.l2_read_probes);
    f("l2_read_hits", r.l2_read_hits);
    f("l2_read_misses", r.l2_read_misses);
    f("l2_read_miss_ratio", r.l2_read_miss_ratio);
    f("l2_write_probes", r.l2_write_probes);
    f("l2_write_hits", r.l2_write_hits);
    f("lrsc_read_hits", r.lrsc_read_hits);
    f("hrsc_read_hits", r.hrsc_read_hits);
    f("llc_read_probes", r.llc_read_probes);
    f("llc_read_hits", r.llc_read_hits);
    f("llc_write_probes", r.llc_write_probes);
    f("llc_write_hits", r.llc_write_hits);
    f("memory_reads", r.memory_reads);
    f("memory_writebacks", r.memory_writebacks);
    f("rst_total", r.rst_total);
    f("rst_mean", r.rst_mean);
    f("rst_l2", r.rst_l2);
    f("l2_serviced_reads", r.l2_serviced_reads);
    f("rst_l2_mean", r.rst_l2_mean);
    f("refresh_stall_cycles", r.refresh_stall_cycles);
    f("bank_stall_cycles", r.bank_stall_cycles);
    f("hrsc_admissions", r.hrsc_admissions);
    f("hrsc_evictions", r.hrsc_evictions);
    f("mispredictions", r.mispredictions);
    f("dsi_blocks", r.dsi_blocks);
    f("dsi_ideal_retention_s", r.dsi_ideal_retention_s);
    for (std::size_t i = 0; i < dsi::kBuckets; ++i) f("dsi_bucket" + std::to_string(i), r.dsi_fractions[i]);
    report_detail::visit_array("l1.", r.l1, f);
    report_detail::visit_array("l2.", r.l2, f);
    report_detail::visit_array("lrsc.", r.lrsc, f);
    report_detail::visit_array("hrsc.", r.hrsc, f);
    report_detail::visit_array("llc.", r.llc, f);
}

// Derived totals appended after the raw fields; recomputed on read.
inline std::vector<std::pair<std::string, std::string>> derived_columns(const SimReport& r) {
    return {
        {"l2_dynamic_nj", units::format_nj(r.l2_dynamic())},
        {"l2_leakage_nj", units::format_double(r.l2_leakage_nj())},
        {"l2_total_nj", units::format_double(r.l2_total_nj())},
        {"total_dynamic_nj", units::format_nj(r.total_dynamic())},
        {"total_leakage_nj", units::format_double(r.total_leakage_nj())},
        {"total_nj", units::format_double(r.total_nj())},
    };
}

// Metrics that get a norm_ column when a baseline is selected.
inline std::vector<std::pair<std::string, double>> normalizable(const SimReport& r) {
    return {
        {"l2_read_miss_ratio", r.l2_read_miss_ratio},
        {"ipc", r.ipc},
        {"rst_total", static_cast<double>(r.rst_total)},
        {"rst_l2", static_cast<double>(r.rst_l2)},
        {"l2_dynamic_nj", r.l2_dynamic().nj()},
        {"l2_leakage_nj", r.l2_leakage_nj()},
        {"l2_total_nj", r.l2_total_nj()},
        {"total_nj", r.total_nj()},
    };
}

inline double normalize(double x, double base) {
    if (x == base) return 1.0;
    return x / base;
}

namespace report_detail {

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::vector<std::string> csv_split(const std::string& line, std::size_t lineno) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    if (quoted) throw ParseError("unterminated quoted field", lineno);
    out.push_back(std::move(cur));
    return out;
}

template <typename T>
std::string format_value(const T& v) {
    if constexpr (std::is_same_v<T, std::string>) return csv_escape(v);
    else if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
    else if constexpr (std::is_same_v<T, double>) return units::format_double(v);
    else if constexpr (std::is_same_v<T, Energy>) return units::format_nj(v);
    else return std::to_string(v);
}

template <typename T>
void parse_value(const std::string& s, T& v) {
    if constexpr (std::is_same_v<T, std::string>) v = s;
    else if constexpr (std::is_same_v<T, bool>) {
        if (s == "true") v = true;
        else if (s == "false") v = false;
        else throw ParseError("expected true or false, got '" + s + "'");
    } else if constexpr (std::is_same_v<T, double>) v = units::parse_double(s);
    else if constexpr (std::is_same_v<T, Energy>) {
        try {
            v = units::parse_energy(s + "nJ");
        } catch (const ConfigError& e) {
            throw ParseError(e.what());
        }
    } else v = static_cast<T>(units::parse_u64(s));
}

} // namespace report_detail

inline std::vector<std::string> report_columns(const std::optional<std::string>& baseline = std::nullopt) {
    std::vector<std::string> cols;
    SimReport dummy;
    visit_fields(dummy, [&](const std::string& name, auto&) { cols.push_back(name); });
    for (const auto& [k, v] : derived_columns(dummy)) cols.push_back(k);
    if (baseline) {
        cols.push_back("baseline");
        for (const auto& [k, v] : normalizable(dummy)) cols.push_back("norm_" + k);
    }
    return cols;
}

// Baseline row for each row: the one of the same benchmark, else the first.
inline std::vector<const SimReport*> baseline_rows(const std::vector<SimReport>& rows,
                                                   const std::optional<std::string>& baseline) {
    std::vector<const SimReport*> bases(rows.size(), nullptr);
    if (!baseline) return bases;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const SimReport* same_bench = nullptr;
        const SimReport* any = nullptr;
        for (const auto& r : rows) {
            if (r.config != *baseline) continue;
            if (!any) any = &r;
            if (r.benchmark == rows[i].benchmark && !same_bench) same_bench = &r;
        }
        bases[i] = same_bench ? same_bench : any;
        if (!bases[i]) throw ConfigError("unknown baseline '" + *baseline + "': no report row with that config");
    }
    return bases;
}

// One row per report, plus norm_ columns when a baseline is named.
inline std::string emit_csv(const std::vector<SimReport>& rows, const std::optional<std::string>& baseline = std::nullopt) {
    const auto bases = baseline_rows(rows, baseline);
    std::string out;
    const auto cols = report_columns(baseline);
    for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
    out += '\n';
    for (std::size_t i = 0; i < rows.size(); ++i) {
        SimReport r = rows[i];
        bool first = true;
        auto put = [&](const std::string& v) {
            if (!first) out += ',';
            out += v;
            first = false;
        };
        visit_fields(r, [&](const std::string&, auto& v) { put(report_detail::format_value(v)); });
        for (const auto& [k, v] : derived_columns(r)) put(v);
        if (baseline) {
            put(report_detail::csv_escape(*baseline));
            const auto mine = normalizable(r);
            const auto theirs = normalizable(*bases[i]);
            for (std::size_t k = 0; k < mine.size(); ++k)
                put(units::format_double(normalize(mine[k].second, theirs[k].second)));
        }
        out += '\n';
    }
    return out;
}

// Reads rows written by emit_csv. Derived and norm_ columns are ignored.
inline std::vector<SimReport> parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string> header;
    std::vector<SimReport> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto cells = report_detail::csv_split(line, lineno);
        if (header.empty()) {
            header = std::move(cells);
            std::vector<std::string> required;
            SimReport dummy;
            visit_fields(dummy, [&](const std::string& name, auto&) { required.push_back(name); });
            for (const auto& name : required)
                if (std::find(header.begin(), header.end(), name) == header.end())
                    throw ParseError("report header lacks column '" + name + "'", lineno);
            continue;
        }
        if (cells.size() != header.size())
            throw ParseError("expected " + std::to_string(header.size()) + " cells, found " +
                                 std::to_string(cells.size()),
                             lineno);
        std::map<std::string, std::string> byname;
        for (std::size_t i = 0; i < header.size(); ++i) byname[header[i]] = cells[i];
        SimReport r;
        visit_fields(r, [&](const std::string& name, auto& v) {
            try {
                report_detail::parse_value(byname.at(name), v);
            } catch (const ParseError& e) {
                throw ParseError("column " + name + ": " + e.what(), lineno);
            }
        });
        rows.push_back(std::move(r));
    }
    return rows;
}

inline nlohmann::ordered_json to_json(const SimReport& report) {
    nlohmann::ordered_json j;
    SimReport r = report;
    visit_fields(r, [&](const std::string& name, auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Energy>) j[name] = v.nj();
        else j[name] = v;
    });
    j["l2_dynamic_nj"] = r.l2_dynamic().nj();
    j["l2_leakage_nj"] = r.l2_leakage_nj();
    j["l2_total_nj"] = r.l2_total_nj();
    j["total_dynamic_nj"] = r.total_dynamic().nj();
    j["total_leakage_nj"] = r.total_leakage_nj();
    j["total_nj"] = r.total_nj();
    return j;
}

inline std::string emit_json(const std::vector<SimReport>& rows, const std::optional<std::string>& baseline = std::nullopt) {
    nlohmann::ordered_json j;
    j["schema"] = "rrap-sim report v1";
    j["runs"] = nlohmann::ordered_json::array();
    const auto bases = baseline_rows(rows, baseline);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const SimReport& r = rows[i];
        auto o = to_json(r);
        if (baseline) {
            const SimReport* b = bases[i];
            nlohmann::ordered_json norm;
            const auto mine = normalizable(r), theirs = normalizable(*b);
            for (std::size_t k = 0; k < mine.size(); ++k) norm[mine[k].first] = normalize(mine[k].second, theirs[k].second);
            o["normalized_to"] = *baseline;
            o["normalized"] = norm;
        }
        j["runs"].push_back(std::move(o));
    }
    return j.dump(2) + "\n";
}

} // namespace rrap
