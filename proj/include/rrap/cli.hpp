#pragma once

// rrap-sim subcommands: gen-trace, simulate, analyze-dsi, report, device.
// run_cli returns the process exit code: 0 success, 1 usage or
// configuration error, 2 runtime error.

#include "CLI11.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "rrap/config.hpp"
#include "rrap/device_model.hpp"
#include "rrap/dsi.hpp"
#include "rrap/error.hpp"
#include "rrap/hierarchy.hpp"
#include "rrap/report.hpp"
#include "rrap/synthetic.hpp"
#include "rrap/trace.hpp"
#include "rrap/units.hpp"

namespace rrap {

struct RunSpec {
    std::optional<std::string> config_path;
    std::string preset = "rrap";
    std::optional<std::string> trace_path;
    std::optional<SyntheticSpec> synthetic;
    std::string out_dir;
    std::optional<std::string> baseline;
    std::vector<std::string> sweep;
    std::string benchmark;
    bool parallel = false;

    void validate() const {
        if (trace_path.has_value() == synthetic.has_value())
            throw ConfigError("exactly one of --trace or --synthetic is required");
        if (out_dir.empty()) throw ConfigError("--out is required");
    }
};

namespace cli_detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) {
        const auto t = units::detail::trim(cur);
        if (!t.empty()) out.emplace_back(t);
    }
    return out;
}

inline std::array<double, dsi::kReuseBuckets> parse_histogram(const std::string& s, char sep) {
    const auto parts = split(s, sep);
    if (parts.size() != dsi::kReuseBuckets)
        throw ConfigError("reuse histogram needs 4 probabilities (reuse 0, 1, 2-63, >=64), got '" + s + "'");
    std::array<double, dsi::kReuseBuckets> h{};
    for (std::size_t i = 0; i < h.size(); ++i) {
        try {
            h[i] = units::parse_double(parts[i]);
        } catch (const ParseError&) {
            throw ConfigError("malformed reuse histogram entry '" + parts[i] + "'");
        }
    }
    return h;
}

inline double parse_fraction(const std::string& s) {
    try {
        return units::parse_double(s);
    } catch (const ParseError&) {
        throw ConfigError("malformed fraction '" + s + "'");
    }
}

inline std::uint64_t parse_count(const std::string& s) {
    try {
        return units::parse_u64(s);
    } catch (const ParseError&) {
        throw ConfigError("malformed count '" + s + "'");
    }
}

} // namespace cli_detail

// "workload=irra-heavy,seed=3,footprint=2MB,reuse=0.4:0.15:0.25:0.2,..."
inline SyntheticSpec parse_synthetic_spec(const std::string& text) {
    using namespace cli_detail;
    SyntheticSpec s;
    const auto items = split(text, ',');
    for (const auto& it : items) {
        const auto eq = it.find('=');
        if (eq == std::string::npos) throw ConfigError("synthetic spec item '" + it + "' is not key=value");
        if (it.substr(0, eq) == "workload") s = bundled_workload(it.substr(eq + 1));
    }
    for (const auto& it : items) {
        const auto eq = it.find('=');
        const std::string k = it.substr(0, eq), v = it.substr(eq + 1);
        if (k == "workload") continue;
        else if (k == "seed") s.seed = parse_count(v);
        else if (k == "cores") s.cores = static_cast<std::uint32_t>(parse_count(v));
        else if (k == "instructions") s.instruction_count = parse_count(v);
        else if (k == "read_fraction") s.read_fraction = parse_fraction(v);
        else if (k == "reuse") s.reuse_histogram = parse_histogram(v, ':');
        else if (k == "irra_fraction") s.irra_fraction = parse_fraction(v);
        else if (k == "dsi_class") s.dsi_class = parse_dsi_class(v);
        else if (k == "footprint") s.footprint_bytes = units::parse_bytes(v);
        else if (k == "line") s.line_bytes = units::parse_bytes(v);
        else if (k == "clock") s.clock_hz = units::parse_hertz(v);
        else if (k == "max_reads") s.max_reads = parse_count(v);
        else throw ConfigError("unknown synthetic spec key '" + k + "'");
    }
    s.validate();
    return s;
}

inline HierarchyConfig resolve_config(const std::string& name_or_path) {
    if (std::filesystem::path(name_or_path).extension() == ".ini" || std::filesystem::exists(name_or_path))
        return load_config_file(name_or_path);
    return builtin_config(name_or_path);
}

inline unsigned sweep_threads(std::size_t jobs) {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("RRAP_SIM_THREADS")) {
        try {
            n = static_cast<unsigned>(std::max<std::uint64_t>(1, units::parse_u64(env)));
        } catch (const ParseError&) {
            throw ConfigError("RRAP_SIM_THREADS must be a positive integer, got '" + std::string(env) + "'");
        }
    }
    return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

// Runs every config on one shared, already parsed trace. Results keep the
// order of `configs` whether or not the runs overlap in time.
inline std::vector<SimReport> simulate_all(const std::vector<HierarchyConfig>& configs,
                                           const std::vector<TraceEvent>& trace, const std::string& benchmark,
                                           bool parallel) {
    std::vector<SimReport> out(configs.size());
    if (!parallel || configs.size() < 2) {
        for (std::size_t i = 0; i < configs.size(); ++i) out[i] = run(trace, configs[i], benchmark);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex m;
    auto worker = [&] {
        for (std::size_t i; (i = next++) < configs.size();) {
            try {
                out[i] = run(trace, configs[i], benchmark);
            } catch (...) {
                std::lock_guard<std::mutex> lk(m);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const unsigned n = sweep_threads(configs.size());
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    f << text;
    if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

inline std::string read_text(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

inline void print_summary_table(std::ostream& out, const std::vector<SimReport>& rows) {
    out << "config,instructions,cycles,ipc,l2_read_miss_ratio,rst_total,l2_dynamic_nj,l2_leakage_nj,l2_total_nj\n";
    for (const auto& r : rows)
        out << r.config << ',' << r.instructions << ',' << r.cycles << ','
            << (r.ipc_available ? units::format_double(r.ipc) : std::string("n/a")) << ','
            << units::format_double(r.l2_read_miss_ratio) << ',' << r.rst_total << ','
            << units::format_nj(r.l2_dynamic()) << ',' << units::format_double(r.l2_leakage_nj()) << ','
            << units::format_double(r.l2_total_nj()) << '\n';
}

inline int cmd_simulate(const RunSpec& spec, std::ostream& out, std::ostream& err) {
    spec.validate();
    std::vector<HierarchyConfig> configs;
    if (!spec.sweep.empty()) {
        if (spec.config_path) throw ConfigError("--config and --sweep are mutually exclusive");
        for (const auto& n : spec.sweep) configs.push_back(resolve_config(n));
    } else if (spec.config_path) {
        configs.push_back(load_config_file(*spec.config_path));
    } else {
        configs.push_back(builtin_config(spec.preset));
    }

    std::vector<TraceEvent> trace;
    std::string bench = spec.benchmark;
    if (spec.trace_path) {
        if (!std::filesystem::exists(*spec.trace_path))
            throw std::runtime_error("trace file '" + *spec.trace_path + "' does not exist");
        trace = read_trace_file(*spec.trace_path);
        if (bench.empty()) {
            std::filesystem::path p(*spec.trace_path);
            if (p.extension() == ".gz") p.replace_extension();
            bench = p.stem().string();
        }
    } else {
        trace = generate(*spec.synthetic);
        if (bench.empty()) bench = "synthetic";
    }

    auto rows = simulate_all(configs, trace, bench, spec.parallel);
    const std::string csv = emit_csv(rows, spec.baseline);
    const std::string json = emit_json(rows, spec.baseline);
    std::filesystem::create_directories(spec.out_dir);
    write_text((std::filesystem::path(spec.out_dir) / "report.csv").string(), csv);
    write_text((std::filesystem::path(spec.out_dir) / "summary.json").string(), json);
    for (const auto& r : rows)
        if (!r.ipc_available) err << "note: " << r.config << ": trace has no NonMem counts, IPC omitted\n";
    print_summary_table(out, rows);
    return 0;
}

inline int cmd_gen_trace(const SyntheticSpec& spec, const std::string& path, std::ostream& out) {
    const auto trace = generate(spec);
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    write_trace_file(path, trace);
    const auto stats = dsi::reuse_stats(trace, spec.line_bytes);
    std::uint64_t mem = 0, reads = 0, instr = 0;
    for (const auto& e : trace) {
        instr += e.count;
        if (e.kind == AccessKind::NonMem) continue;
        ++mem;
        reads += e.kind == AccessKind::Read;
    }
    out << "wrote " << path << '\n'
        << "events " << trace.size() << '\n'
        << "instructions " << instr << '\n'
        << "memory_refs " << mem << '\n'
        << "lines_touched " << stats.lines << '\n'
        << "read_fraction " << units::format_double(mem ? static_cast<double>(reads) / static_cast<double>(mem) : 0.0)
        << '\n';
    for (std::size_t i = 0; i < dsi::kReuseBuckets; ++i) {
        static const char* names[] = {"reuse_0", "reuse_1", "reuse_2_63", "reuse_ge_64"};
        out << names[i] << ' ' << units::format_double(stats.line_fractions[i]) << '\n';
    }
    out << "irra_fraction " << units::format_double(stats.irra_fraction) << '\n'
        << "exclusive_read_share " << units::format_double(stats.exclusive_read_share) << '\n';
    return 0;
}

struct DsiBoundsArg {
    dsi::Bounds bounds;
    std::array<std::string, 4> labels{"2.4ms", "4.8ms", "9.6ms", "19.2ms"};
};

inline DsiBoundsArg parse_bounds(const std::string& text) {
    const auto parts = cli_detail::split(text, ',');
    if (parts.size() != 4) throw ConfigError("--bounds needs exactly 4 ascending times, got '" + text + "'");
    DsiBoundsArg b;
    for (std::size_t i = 0; i < 4; ++i) {
        b.bounds.seconds[i] = units::parse_seconds(parts[i]);
        b.labels[i] = parts[i];
    }
    try {
        b.bounds.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return b;
}

inline std::string analyze_dsi_csv(const std::vector<TraceEvent>& trace, const DsiBoundsArg& b, double clock_hz,
                                   std::uint64_t line_bytes) {
    const auto histories = dsi::histories_from_trace(trace, line_bytes);
    std::vector<dsi::DsiResult> results;
    results.reserve(histories.size());
    for (const auto& h : histories) results.push_back(dsi::compute_dsi(h));

    std::string o = "address,dsi_cycles,dsi_seconds,bucket\n";
    char buf[32];
    for (const auto& r : results) {
        auto p = std::to_chars(buf, buf + sizeof buf, r.address, 16).ptr;
        o += "0x" + std::string(buf, p) + ',' + std::to_string(r.dsi) + ',' +
             units::format_double(static_cast<double>(r.dsi) / clock_hz) + ',' +
             std::to_string(dsi::bucket_of(r.dsi, b.bounds, clock_hz)) + '\n';
    }
    o += "summary,blocks,ideal_retention_cycles,ideal_retention_s";
    o += ",lt_" + b.labels[0];
    for (std::size_t i = 1; i < 4; ++i) o += "," + b.labels[i - 1] + "_to_" + b.labels[i];
    o += ",ge_" + b.labels[3] + "\n";
    Cycle ideal = 0;
    for (const auto& r : results) ideal = std::max(ideal, r.dsi);
    const auto d = dsi::dsi_distribution(std::span<const dsi::DsiResult>(results), b.bounds, clock_hz);
    o += "summary," + std::to_string(results.size()) + ',' + std::to_string(ideal) + ',' +
         units::format_double(static_cast<double>(ideal) / clock_hz);
    for (double f : d.fractions) o += "," + units::format_double(f);
    o += '\n';
    return o;
}

inline int cmd_device(std::ostream& out, double clock_hz) {
    const auto table = device::default_design_table();
    const auto& cal = table.calibration();
    const auto& ref = cal.family.reference();
    out << "calibration residual (relative current error): lrsc " << units::format_double(cal.low_residual)
        << ", hrsc " << units::format_double(cal.high_residual) << '\n'
        << "polarization_efficiency " << units::format_double(ref.polarization_efficiency) << '\n'
        << "critical_current_per_delta_A "
        << units::format_double(device::critical_current(ref) / device::thermal_barrier(ref)) << '\n'
        << "design,retention_s,delta,write_current_A,pulse_s,write_latency_cycles,refreshed\n";
    for (const auto& p : table.points()) {
        const auto op = table.operating_point(p.retention, clock_hz);
        out << p.name << ',' << units::format_double(p.retention) << ','
            << units::format_double(device::delta_for_retention(p.retention, cal.family.t1())) << ','
            << units::format_double(op.write_current) << ',' << units::format_double(op.write_pulse_width) << ','
            << op.write_latency_cycles << ',' << (p.refreshed ? "yes" : "no") << '\n';
    }
    return 0;
}

inline int run_cli(const std::vector<std::string>& argv_in, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    CLI::App app{"rrap-sim: trace-driven simulator of a retention-partitioned STT-RAM L2 hierarchy", "rrap-sim"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "rrap-sim 1.0");

    // gen-trace
    auto* gen = app.add_subcommand("gen-trace", "write a synthetic trace");
    SyntheticSpec gs;
    std::string gen_out, gen_workload, gen_hist, gen_class = "unimodal", gen_footprint, gen_clock, gen_line;
    gen->add_option("-o,--out", gen_out, "output trace path (.gz compresses)")->required();
    gen->add_option("--workload", gen_workload, "start from a bundled workload (irra-heavy, smoke)");
    gen->add_option("--seed", gs.seed, "random seed");
    gen->add_option("--cores", gs.cores, "number of cores");
    gen->add_option("--instructions", gs.instruction_count, "instructions per core");
    gen->add_option("--read-fraction", gs.read_fraction, "read share of regular-line references");
    gen->add_option("--reuse-histogram", gen_hist, "line shares for reuse 0,1,2-63,>=64");
    gen->add_option("--irra-fraction", gs.irra_fraction, "share of lines that are written once then only read");
    gen->add_option("--dsi-class", gen_class, "unimodal | bimodal | symmetric");
    gen->add_option("--footprint", gen_footprint, "footprint, e.g. 2MB");
    gen->add_option("--line", gen_line, "line size, e.g. 64B");
    gen->add_option("--clock", gen_clock, "clock used for DSI targets, e.g. 3GHz");
    gen->add_option("--max-reads", gs.max_reads, "upper read count for the >=64 bucket");

    // simulate
    auto* sim = app.add_subcommand("simulate", "run one or more configurations on a trace");
    RunSpec rs;
    std::string sim_config, sim_synth, sim_sweep, sim_baseline;
    sim->add_option("--config", sim_config, "INI configuration file");
    sim->add_option("--preset", rs.preset, "built-in configuration name")->capture_default_str();
    std::string sim_trace;
    sim->add_option("--trace", sim_trace, "trace file (.gz accepted)");
    sim->add_option("--synthetic", sim_synth, "inline synthetic spec, e.g. workload=irra-heavy,seed=2");
    sim->add_option("--out", rs.out_dir, "output directory")->required();
    sim->add_option("--baseline", sim_baseline, "config name used for norm_ columns");
    sim->add_option("--sweep", sim_sweep, "comma list of built-in names or .ini paths");
    sim->add_option("--benchmark", rs.benchmark, "benchmark label for the report rows");
    sim->add_flag("--parallel", rs.parallel, "run sweep configurations concurrently (RRAP_SIM_THREADS caps)");

    // analyze-dsi
    auto* ad = app.add_subcommand("analyze-dsi", "per-line DSI and distribution of a trace");
    std::string ad_trace, ad_bounds, ad_out, ad_clock = "3GHz", ad_line = "64B";
    ad->add_option("trace", ad_trace, "trace file")->required();
    ad->add_option("--bounds", ad_bounds, "4 ascending bucket bounds, e.g. 2.4ms,4.8ms,9.6ms,19.2ms");
    ad->add_option("--clock", ad_clock, "clock converting cycles to seconds")->capture_default_str();
    ad->add_option("--line", ad_line, "line size")->capture_default_str();
    ad->add_option("-o,--out", ad_out, "output CSV (default stdout)");

    // report
    auto* rp = app.add_subcommand("report", "merge report CSVs, optionally normalized");
    std::vector<std::string> rp_inputs;
    std::string rp_baseline, rp_out, rp_json;
    rp->add_option("inputs", rp_inputs, "report.csv files")->required();
    rp->add_option("--baseline", rp_baseline, "config name used for norm_ columns");
    rp->add_option("-o,--out", rp_out, "output CSV (default stdout)");
    rp->add_option("--json", rp_json, "also write a JSON summary");

    // device
    auto* dv = app.add_subcommand("device", "print the calibrated device model and design table");
    std::string dv_clock = "3GHz";
    dv->add_option("--clock", dv_clock, "clock for latency conversion")->capture_default_str();

    std::vector<std::string> args(argv_in.rbegin(), argv_in.rend());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, er;
        const int code = app.exit(e, o, er);
        out << o.str();
        err << er.str();
        return code == 0 ? 0 : 1;
    }

    try {
        if (*gen) {
            if (!gen_workload.empty()) {
                SyntheticSpec base = bundled_workload(gen_workload);
                // Explicit flags still win over the bundled values.
                if (gen->count("--seed")) base.seed = gs.seed;
                if (gen->count("--cores")) base.cores = gs.cores;
                if (gen->count("--instructions")) base.instruction_count = gs.instruction_count;
                if (gen->count("--read-fraction")) base.read_fraction = gs.read_fraction;
                if (gen->count("--irra-fraction")) base.irra_fraction = gs.irra_fraction;
                if (gen->count("--max-reads")) base.max_reads = gs.max_reads;
                if (gen->count("--dsi-class")) base.dsi_class = parse_dsi_class(gen_class);
                gs = base;
            } else {
                gs.dsi_class = parse_dsi_class(gen_class);
            }
            if (!gen_hist.empty()) gs.reuse_histogram = cli_detail::parse_histogram(gen_hist, ',');
            if (!gen_footprint.empty()) gs.footprint_bytes = units::parse_bytes(gen_footprint);
            if (!gen_line.empty()) gs.line_bytes = units::parse_bytes(gen_line);
            if (!gen_clock.empty()) gs.clock_hz = units::parse_hertz(gen_clock);
            return cmd_gen_trace(gs, gen_out, out);
        }
        if (*sim) {
            if (!sim_config.empty()) rs.config_path = sim_config;
            if (!sim_trace.empty()) rs.trace_path = sim_trace;
            if (!sim_synth.empty()) rs.synthetic = parse_synthetic_spec(sim_synth);
            if (!sim_baseline.empty()) rs.baseline = canonical_config_name(sim_baseline);
            if (!sim_sweep.empty()) rs.sweep = cli_detail::split(sim_sweep, ',');
            return cmd_simulate(rs, out, err);
        }
        if (*ad) {
            DsiBoundsArg b;
            if (!ad_bounds.empty()) b = parse_bounds(ad_bounds);
            const double clock = units::parse_hertz(ad_clock);
            const std::uint64_t line = units::parse_bytes(ad_line);
            if (!units::is_power_of_two(line)) throw ConfigError("--line must be a power of two");
            if (!std::filesystem::exists(ad_trace)) throw std::runtime_error("trace file '" + ad_trace + "' does not exist");
            const std::string csv = analyze_dsi_csv(read_trace_file(ad_trace), b, clock, line);
            if (ad_out.empty()) out << csv;
            else write_text(ad_out, csv);
            return 0;
        }
        if (*rp) {
            std::vector<SimReport> rows;
            for (const auto& p : rp_inputs) {
                try {
                    auto part = parse_csv(read_text(p));
                    rows.insert(rows.end(), part.begin(), part.end());
                } catch (const ParseError& e) {
                    throw ParseError(p + ": " + e.what());
                }
            }
            std::optional<std::string> base;
            if (!rp_baseline.empty()) base = canonical_config_name(rp_baseline);
            const std::string csv = emit_csv(rows, base);
            if (rp_out.empty()) out << csv;
            else write_text(rp_out, csv);
            if (!rp_json.empty()) write_text(rp_json, emit_json(rows, base));
            return 0;
        }
        if (*dv) return cmd_device(out, units::parse_hertz(dv_clock));
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

} // namespace rrap
