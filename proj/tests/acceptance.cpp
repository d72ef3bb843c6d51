// Acceptance checks 1-9, one PASS/FAIL line each. Exit status is the number
// of failed criteria (0 when all pass).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <list>
#include <map>
#include <random>
#include <sstream>

#include "oracles.hpp"

using namespace rrap;
namespace fs = std::filesystem;

namespace {

struct Check {
    bool ok = true;
    std::string why;
    void require(bool cond, const std::string& msg) {
        if (!cond && ok) {
            ok = false;
            why = msg;
        }
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
    std::ostringstream o;
    o.precision(6);
    o << v;
    return o.str();
}

// 1. Device model.
Check device_model() {
    Check c;
    const auto t0 = Clock::now();
    const double t1 = 1e-9;
    for (int i = 0; i <= 6000; ++i) {
        const double d = i * 0.01;
        const double back = device::delta_for_retention(device::retention_time(d, t1), t1);
        const double err = d == 0.0 ? std::abs(back) : std::abs(back - d) / d;
        c.require(err <= 1e-12, "delta round trip error " + fmt(err) + " at " + fmt(d));
    }
    const auto table = device::default_design_table();
    c.require(table.write_latency_cycles(140e-3, 3e9) == 12, "140ms latency");
    c.require(table.write_latency_cycles(10e-3, 3e9) == 7, "10ms latency");
    c.require(table.write_latency_cycles(1e-3, 3e9) == 6, "1ms latency");
    c.require(builtin_config("rrap-design1").lrsc.tech.write_latency_cycles == 12, "design1 preset");
    c.require(builtin_config("rrap").lrsc.tech.write_latency_cycles == 7, "design2 preset");
    c.require(builtin_config("rrap-design3").lrsc.tech.write_latency_cycles == 6, "design3 preset");
    const device::CalibrationInputs in;
    const auto& fam = table.calibration().family;
    for (const auto& pt : {in.low, in.high}) {
        const double i = device::write_current_for_pulse(fam.at_retention(pt.retention), pt.pulse_width);
        const double err = std::abs(i - pt.current) / pt.current;
        c.require(err < 0.10, "calibration current error " + fmt(err));
    }
    const double s = seconds_since(t0);
    c.require(s < 1.0, "runtime " + fmt(s) + "s");
    if (c.ok)
        c.why = "residuals " + fmt(table.calibration().low_residual) + ", " + fmt(table.calibration().high_residual);
    return c;
}

// 2. LRU against a recency list.
Check lru_oracle() {
    Check c;
    const auto t0 = Clock::now();
    TechParams tech;
    tech.read_latency_cycles = 4;
    tech.write_latency_cycles = 7;
    CacheArray a("lru", {16 * 64, 64, 4, 1}, tech);
    c.require(a.geometry().sets() == 4, "expected 4 sets");
    std::map<std::uint64_t, std::list<std::pair<std::uint64_t, bool>>> sets;
    std::mt19937_64 g(42);
    std::uint64_t hits = 0, victims = 0;
    for (int i = 0; i < 10000 && c.ok; ++i) {
        const std::uint64_t line = g() % 40;
        const bool write = g() % 4 == 0;
        auto& l = sets[line % 4];
        bool want_hit = false;
        std::optional<std::pair<std::uint64_t, bool>> want_victim;
        for (auto it = l.begin(); it != l.end(); ++it) {
            if (it->first != line) continue;
            auto e = *it;
            e.second = e.second || write;
            l.erase(it);
            l.push_front(e);
            want_hit = true;
            break;
        }
        if (!want_hit) {
            if (l.size() == 4) {
                want_victim = l.back();
                l.pop_back();
            }
            l.push_front({line, write});
        }
        const auto got = a.lookup(line * 64, write ? AccessKind::Write : AccessKind::Read);
        c.require(got.hit == want_hit, "hit/miss mismatch at access " + std::to_string(i));
        if (got.hit) {
            ++hits;
            continue;
        }
        const auto f = a.fill(line * 64, write);
        c.require(f.victim.has_value() == want_victim.has_value(), "victim presence at access " + std::to_string(i));
        if (f.victim && want_victim) {
            ++victims;
            c.require(f.victim->address == want_victim->first * 64 && f.victim->dirty == want_victim->second,
                      "victim mismatch at access " + std::to_string(i));
        }
    }
    const double s = seconds_since(t0);
    c.require(s < 1.0, "runtime " + fmt(s) + "s");
    if (c.ok) c.why = std::to_string(hits) + " hits, " + std::to_string(victims) + " victims matched";
    return c;
}

// 3. Counter and admission audit.
Check counter_audit() {
    Check c;
    const auto t0 = Clock::now();
    const auto trace = generate(test::audit_workload());
    c.require(trace.size() >= 100'000, "trace has only " + std::to_string(trace.size()) + " events");
    const auto cfg = test::audit_config();
    Hierarchy h(cfg, cores_for(cfg, trace));
    h.enable_llc_log();
    h.run(trace);
    const auto out = test::audit_admissions(h, 64);
    for (const auto& v : out.violations) c.require(false, v);
    c.require(out.admissions > 0, "no admissions to audit");
    c.require(out.blocked_by_write > 0, "no write-blocked residency exercised");
    c.require(out.saturated_lines > 0, "no saturated counter exercised");
    const double s = seconds_since(t0);
    c.require(s < 5.0, "runtime " + fmt(s) + "s");
    if (c.ok)
        c.why = std::to_string(trace.size()) + " events, " + std::to_string(out.admissions) + " admissions, " +
                std::to_string(out.blocked_by_write) + " write-blocked reads, " + std::to_string(out.saturated_lines) +
                " saturated lines";
    return c;
}

// 4. LLC eviction leaves the L2 replica in place.
Check non_inclusive() {
    Check c;
    for (const char* name : {"sram-baseline", "rrap"}) {
        auto cfg = builtin_config(name);
        auto shrink = [](ArrayConfig& a, std::uint64_t lines, std::uint32_t ways) {
            a.geometry = {lines * 64, 64, ways, 1};
        };
        shrink(cfg.l1, 4, 2);
        shrink(cfg.llc, 16, 4);
        if (cfg.is_rrap()) {
            shrink(cfg.lrsc, 16, 2);
            shrink(cfg.hrsc, 16, 2);
        } else {
            shrink(cfg.l2, 16, 2);
        }
        Hierarchy h(cfg);
        Cycle t = 0;
        auto read = [&](std::uint64_t line) { return h.access(0, AccessKind::Read, line * 64, t += 1000); };
        read(0);
        c.require(h.l2(0).contains(0), std::string(name) + ": replica not installed");
        for (std::uint64_t x : {4, 12, 20, 28}) read(x);
        c.require(!h.llc().contains(0), std::string(name) + ": LLC copy not evicted");
        c.require(h.l2(0).contains(0), std::string(name) + ": replica back-invalidated");
        c.require(read(0).level == ServiceLevel::L2, std::string(name) + ": re-read did not hit L2");
    }
    return c;
}

// 5. DSI against the quadratic oracle.
Check dsi_oracle() {
    Check c;
    std::mt19937_64 g(2024);
    for (int i = 0; i < 1000 && c.ok; ++i) {
        dsi::BlockHistory h;
        h.address = 64u * i;
        const int n = 1 + static_cast<int>(g() % 30);
        Cycle t = g() % 100;
        for (int k = 0; k < n; ++k) {
            t += g() % 1000;
            h.events.push_back({t, g() % 3 == 0 ? dsi::EventKind::Write : dsi::EventKind::Read});
        }
        if (g() % 2) h.events.push_back({t + g() % 50, dsi::EventKind::Evict});
        Cycle best = 0;
        const auto& e = h.events;
        for (std::size_t a = 0; a < e.size(); ++a) {
            if (a != 0 && e[a].kind != dsi::EventKind::Write) continue;
            for (std::size_t b = a + 1; b < e.size() && e[b].kind == dsi::EventKind::Read; ++b)
                best = std::max(best, e[b].cycle - e[a].cycle);
        }
        c.require(dsi::compute_dsi(h).dsi == best, "history " + std::to_string(i) + " disagrees");
    }
    using K = dsi::EventKind;
    const dsi::BlockHistory fig{0x1000,
                                {{0, K::Write},
                                 {4, K::Read},
                                 {8, K::Read},
                                 {10, K::Write},
                                 {14, K::Write},
                                 {20, K::Read},
                                 {35, K::Read},
                                 {50, K::Read},
                                 {60, K::Evict}}};
    const auto r = dsi::compute_dsi(fig);
    c.require(r.dsi == 36 && r.start == 14 && r.end == 50, "structural example returned " + std::to_string(r.dsi));
    return c;
}

// 6. Refresh over an idle 100ms window.
Check refresh_accounting() {
    Check c;
    const Cycle end = units::seconds_to_cycles_floor(0.1, 3e9);
    struct Idle {
        std::uint64_t refreshes, lines;
        Cycle period;
        std::int64_t energy_fj;
        double l2_total_nj;
    };
    auto idle = [&](const std::string& name) {
        Hierarchy h(builtin_config(name), 1);
        h.finish_at(end);
        const auto& l = h.lrsc(0);
        return Idle{l.stats().refreshes, l.geometry().lines(),
                    h.l2_refresh(0) ? h.l2_refresh(0)->period_cycles() : 0,
                    l.energy().category(EnergyCategory::Refresh).fj(), h.report().l2_total_nj()};
    };
    const auto d3 = idle("rrap-design3"), d2 = idle("rrap"), d1 = idle("rrap-design1");
    for (const auto* d : {&d3, &d2}) {
        if (d->period == 0) {
            c.require(false, "refresh not scheduled");
            continue;
        }
        const std::uint64_t want = d->lines * (end / d->period);
        const std::uint64_t diff = d->refreshes > want ? d->refreshes - want : want - d->refreshes;
        c.require(diff <= d->lines, "refresh count " + std::to_string(d->refreshes) + " vs " + std::to_string(want));
    }
    c.require(d1.refreshes == 0 && d1.energy_fj == 0, "design1 refreshed");
    const double ratio = static_cast<double>(d3.energy_fj) / static_cast<double>(d2.energy_fj);
    c.require(std::abs(ratio - 10.0) <= 0.2, "design3/design2 refresh energy ratio " + fmt(ratio));
    c.require(d3.l2_total_nj > d2.l2_total_nj && d2.l2_total_nj > d1.l2_total_nj, "energy ordering d3 > d2 > d1");
    if (c.ok)
        c.why = "ratio " + fmt(ratio) + ", L2 energy d3/d2/d1 " + fmt(d3.l2_total_nj) + "/" + fmt(d2.l2_total_nj) +
                "/" + fmt(d1.l2_total_nj) + " nJ";
    return c;
}

// 7. Directional results on the IRRA-heavy workload.
Check directional() {
    Check c;
    const auto spec = bundled_workload("irra-heavy");
    const auto trace = generate(spec);
    std::uint64_t instr = 0;
    for (const auto& e : trace) instr += e.count;
    c.require(instr >= 1'000'000, "only " + std::to_string(instr) + " instructions");
    c.require(spec.footprint_bytes == 4 * builtin_config("sram-baseline").l2.geometry.capacity_bytes,
              "footprint is not 4x the L2");
    std::map<std::string, SimReport> r;
    for (const char* name : {"sram-baseline", "edram-baseline", "sttram-baseline", "rrap"}) {
        const auto t0 = Clock::now();
        r[name] = run(trace, builtin_config(name), "irra-heavy");
        const double s = seconds_since(t0);
        c.require(s < 60.0, std::string(name) + " took " + fmt(s) + "s");
    }
    const auto &sram = r["sram-baseline"], &edram = r["edram-baseline"], &rrap = r["rrap"];
    c.require(rrap.l2_read_miss_ratio < sram.l2_read_miss_ratio,
              "miss ratio " + fmt(rrap.l2_read_miss_ratio) + " vs sram " + fmt(sram.l2_read_miss_ratio));
    c.require(rrap.ipc_available && sram.ipc_available && rrap.ipc > sram.ipc,
              "ipc " + fmt(rrap.ipc) + " vs sram " + fmt(sram.ipc));
    c.require(rrap.l2_total_nj() < edram.l2_total_nj(),
              "L2 energy " + fmt(rrap.l2_total_nj()) + " vs edram " + fmt(edram.l2_total_nj()));
    c.require(rrap.l2_leakage_nj() < sram.l2_leakage_nj(),
              "L2 leakage " + fmt(rrap.l2_leakage_nj()) + " vs sram " + fmt(sram.l2_leakage_nj()));
    if (c.ok)
        c.why = "miss " + fmt(rrap.l2_read_miss_ratio) + " < " + fmt(sram.l2_read_miss_ratio) + ", ipc " +
                fmt(rrap.ipc) + " > " + fmt(sram.ipc) + ", L2 nJ " + fmt(rrap.l2_total_nj()) + " < edram " +
                fmt(edram.l2_total_nj());
    return c;
}

// 8. Three dynamic-energy tallies.
Check energy_tallies() {
    Check c;
    const std::vector<std::pair<std::string, std::vector<TraceEvent>>> traces = {
        {"audit", generate(test::audit_workload())}, {"smoke", generate(bundled_workload("smoke"))}};
    std::size_t runs = 0;
    for (const auto& [tname, trace] : traces) {
        for (const auto& name : builtin_config_names()) {
            auto cfg = builtin_config(name);
            Hierarchy h(cfg, cores_for(cfg, trace));
            h.run(trace);
            const auto t = h.energy_tallies();
            c.require(t.running == t.categories && t.running == t.replay, name + " on " + tname + ": tallies differ");
            ++runs;
        }
    }
    if (c.ok) c.why = std::to_string(runs) + " runs agree to the femtojoule";
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

// 9. Repeated invocations of the binary give identical bytes.
Check determinism() {
    Check c;
    const fs::path dir = fs::temp_directory_path() / "rrap_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string bin = RRAP_SIM_BINARY;
    auto sh = [&](const std::string& cmd) {
        const int st = std::system((cmd + " > /dev/null 2>&1").c_str());
        c.require(st == 0, "command failed: " + cmd);
    };
    for (const char* run : {"a", "b"}) {
        const fs::path d = dir / run;
        fs::create_directories(d);
        sh(bin + " gen-trace --workload smoke --seed 3 -o " + (d / "t.trace").string());
        sh(bin + " gen-trace --workload smoke --seed 3 -o " + (d / "t.trace.gz").string());
        sh(bin + " simulate --trace " + (d / "t.trace.gz").string() +
           " --sweep sram-baseline,edram-baseline,sttram-baseline,rrap --baseline sram-baseline --parallel --out " +
           (d / "sim").string());
        sh(bin + " simulate --synthetic workload=smoke,seed=4 --preset rrap --out " + (d / "syn").string());
        sh(bin + " analyze-dsi " + (d / "t.trace").string() + " -o " + (d / "dsi.csv").string());
    }
    std::size_t files = 0;
    for (const char* f : {"t.trace", "t.trace.gz", "sim/report.csv", "sim/summary.json", "syn/report.csv",
                          "syn/summary.json", "dsi.csv"}) {
        const auto a = slurp(dir / "a" / f), b = slurp(dir / "b" / f);
        c.require(!a.empty(), std::string(f) + " is empty");
        c.require(a == b, std::string(f) + " differs between runs");
        ++files;
    }
    if (c.ok) c.why = std::to_string(files) + " output files byte-identical";
    return c;
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Check()>>> criteria = {
        {"device model", device_model},       {"LRU oracle", lru_oracle},
        {"counter audit", counter_audit},     {"non-inclusive replica", non_inclusive},
        {"DSI oracle", dsi_oracle},           {"refresh accounting", refresh_accounting},
        {"directional IRRA-heavy", directional}, {"energy tallies", energy_tallies},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Check c;
        try {
            c = criteria[i].second();
        } catch (const std::exception& e) {
            c.ok = false;
            c.why = std::string("exception: ") + e.what();
        }
        failed += !c.ok;
        std::cout << (c.ok ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first;
        if (!c.why.empty()) std::cout << " (" << c.why << ")";
        std::cout << std::endl;
    }
    return failed;
}
