#pragma once

// Hierarchy configuration: technology presets, named built-in configurations
// and the INI loader. Every number carries a unit in the file; values are
// converted to SI / cycles here and nowhere else.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rrap/cache.hpp"
#include "rrap/device_model.hpp"
#include "rrap/error.hpp"
#include "rrap/refresh.hpp"
#include "rrap/units.hpp"

namespace rrap {

struct ArrayConfig {
    std::string preset;
    CacheGeometry geometry;
    TechParams tech;
};

struct TechPreset {
    const char* name;
    std::uint64_t capacity;
    std::uint32_t associativity;
    std::uint32_t banks;
    double read_ns, write_ns;
    const char* read_energy;
    const char* write_energy;
    double leakage_mw;
    double area_mm2;
};

// L2 rows are the private L2 bank characterization at 32nm / 350K. The L1
// row and the LLC row are reconstructions: the LLC scales the 1MB eDRAM row
// by sqrt(6) in latency and dynamic energy for its 6MB banks and by 96 in
// leakage and area.
inline const std::vector<TechPreset>& tech_presets() {
    static const std::vector<TechPreset> rows = {
        {"sram-32k", 32u << 10, 8, 1, 0.667, 0.667, "0.018nJ", "0.018nJ", 39.4, 0.09},
        {"sram-512k", 512u << 10, 8, 1, 1.277, 1.277, "0.293nJ", "0.293nJ", 1753.444, 1.410},
        {"edram-1m", 1u << 20, 8, 1, 1.072, 1.022, "0.289nJ", "0.424nJ", 337.329, 0.745},
        {"sttram-1m", 1u << 20, 8, 1, 1.340, 10.218, "0.280nJ", "0.654nJ", 212.022, 0.526},
        {"lrsc-512k", 512u << 10, 8, 1, 1.260, 2.153, "0.233nJ", "0.269nJ", 104.797, 0.243},
        {"hrsc-512k", 512u << 10, 8, 1, 1.261, 10.153, "0.233nJ", "0.601nJ", 114.915, 0.357},
        {"edram-96m", 96ull << 20, 16, 16, 2.626, 2.503, "0.708nJ", "1.039nJ", 337.329 * 96, 0.745 * 96},
    };
    return rows;
}

inline Energy default_tag_energy(Energy read) { return Energy::from_fj(read.fj() / 10); }

inline ArrayConfig array_preset(const std::string& name, double clock_hz) {
    for (const auto& r : tech_presets()) {
        if (name != r.name) continue;
        ArrayConfig a;
        a.preset = name;
        a.geometry = {r.capacity, 64, r.associativity, r.banks};
        a.tech.read_latency_cycles = units::seconds_to_cycles_ceil(r.read_ns * 1e-9, clock_hz);
        a.tech.write_latency_cycles = units::seconds_to_cycles_ceil(r.write_ns * 1e-9, clock_hz);
        a.tech.read_energy = units::parse_energy(r.read_energy);
        a.tech.write_energy = units::parse_energy(r.write_energy);
        a.tech.tag_read_energy = default_tag_energy(a.tech.read_energy);
        a.tech.leakage_mw = r.leakage_mw;
        a.tech.area_mm2 = r.area_mm2;
        return a;
    }
    throw ConfigError("unknown technology preset '" + name + "'");
}

enum class L2Kind { Sram, Edram, SttRam, Rrap };

inline L2Kind parse_l2_kind(const std::string& s) {
    if (s == "sram") return L2Kind::Sram;
    if (s == "edram") return L2Kind::Edram;
    if (s == "sttram") return L2Kind::SttRam;
    if (s == "rrap") return L2Kind::Rrap;
    throw ConfigError("l2.variant must be sram, edram, sttram or rrap, got '" + s + "'");
}

inline const char* to_string(L2Kind k) {
    switch (k) {
    case L2Kind::Sram: return "sram";
    case L2Kind::Edram: return "edram";
    case L2Kind::SttRam: return "sttram";
    default: return "rrap";
    }
}

inline constexpr double kEdramRefreshPeriod = 40e-6;

struct HierarchyConfig {
    std::string name = "custom";
    double clock_hz = 3e9;
    std::uint32_t cores = 0;  // 0: one more than the largest core id in the trace

    ArrayConfig l1;
    L2Kind l2_kind = L2Kind::Sram;
    ArrayConfig l2;    // baseline L2 (sram / edram / sttram)
    ArrayConfig lrsc;  // rrap
    ArrayConfig hrsc;  // rrap
    ArrayConfig llc;

    Cycle memory_latency_cycles = 0;
    Cycle l2_to_l1_transfer_cycles = 18;
    Cycle llc_to_l2_transfer_cycles = 18;
    Cycle mem_to_l2_transfer_cycles = 360;

    std::optional<std::uint32_t> nr_th = 64;  // nullopt: never admit

    // Refresh of the baseline L2 (edram) or of LRSC (rrap).
    RefreshPolicy l2_refresh;
    RefreshPolicy llc_refresh;

    device::CalibrationInputs calibration;
    double lrsc_retention = 10e-3;
    double hrsc_retention = 10.0 * units::kSecondsPerYear;

    bool is_rrap() const { return l2_kind == L2Kind::Rrap; }

    // Retention the L2 refresh period must not exceed, if any.
    std::optional<double> l2_retention() const {
        if (is_rrap()) return lrsc_retention;
        return std::nullopt;
    }

    std::vector<std::string> validation_errors() const {
        std::vector<std::string> errs;
        auto check = [&](const std::function<void()>& f) {
            try {
                f();
            } catch (const std::exception& e) {
                errs.emplace_back(e.what());
            }
        };
        if (!(clock_hz > 0.0)) errs.emplace_back("processor.clock must be positive");
        check([&] { l1.geometry.validate("l1"); });
        check([&] { l1.tech.validate("l1"); });
        check([&] { llc.geometry.validate("llc"); });
        check([&] { llc.tech.validate("llc"); });
        if (is_rrap()) {
            check([&] { lrsc.geometry.validate("rrap.lrsc"); });
            check([&] { hrsc.geometry.validate("rrap.hrsc"); });
            check([&] { lrsc.tech.validate("rrap.lrsc"); });
            check([&] { hrsc.tech.validate("rrap.hrsc"); });
            if (nr_th && (*nr_th == 0 || *nr_th > kReadCounterMax + 1u))
                errs.emplace_back("rrap.nr_th must be in [1, 64] or inf (the read counter saturates at 63)");
            if (!(lrsc_retention > 0.0)) errs.emplace_back("device.lrsc_retention must be positive");
            if (!(hrsc_retention > 0.0)) errs.emplace_back("device.hrsc_retention must be positive");
        } else {
            check([&] { l2.geometry.validate("l2"); });
            check([&] { l2.tech.validate("l2"); });
            if (l2_refresh.enabled && l2_kind != L2Kind::Edram)
                errs.emplace_back(std::string("refresh enabled on a ") + to_string(l2_kind) +
                                  " L2, which has no retention limit to refresh against");
        }
        std::set<std::uint64_t> line_sizes = {l1.geometry.line_bytes, llc.geometry.line_bytes};
        if (is_rrap()) {
            line_sizes.insert(lrsc.geometry.line_bytes);
            line_sizes.insert(hrsc.geometry.line_bytes);
        } else {
            line_sizes.insert(l2.geometry.line_bytes);
        }
        if (line_sizes.size() != 1) errs.emplace_back("all levels must use the same line size");
        auto check_refresh = [&](const char* where, const RefreshPolicy& p, const ArrayConfig& a,
                                 std::optional<double> retention) {
            if (!p.enabled) return;
            check([&] {
                try {
                    RefreshSchedule(p, a.geometry.lines(), a.geometry.associativity, a.geometry.banks, clock_hz,
                                    retention);
                } catch (const ConfigError& e) {
                    throw ConfigError(std::string(where) + ": " + e.what());
                }
            });
        };
        if (!errs.empty()) return errs;
        check_refresh("refresh", l2_refresh, is_rrap() ? lrsc : l2, l2_retention());
        check_refresh("llc.refresh", llc_refresh, llc, std::nullopt);
        return errs;
    }

    void validate() const {
        const auto errs = validation_errors();
        if (errs.empty()) return;
        std::string msg = "invalid configuration '" + name + "':";
        for (const auto& e : errs) msg += "\n  - " + e;
        throw ConfigError(msg);
    }

    std::uint64_t line_bytes() const { return l1.geometry.line_bytes; }
};

namespace config_detail {

inline device::DesignTable design_table_for(const HierarchyConfig& c) {
    device::DesignTable base = device::default_design_table();
    std::vector<device::DesignPoint> pts = base.points();
    for (auto& p : pts)
        if (p.name != "design2" && p.name != "hrsc") p.write_current.reset();
    pts[1].write_current = c.calibration.low.current;
    pts[3].write_current = c.calibration.high.current;
    return device::DesignTable(device::calibrate(c.calibration), std::move(pts), base.reference_clock_hz());
}

inline bool retention_needs_refresh(const device::DesignTable& t, double r) {
    for (const auto& p : t.points())
        if (std::abs(p.retention - r) <= 1e-9 * r) return p.refreshed;
    double free_from = t.max_retention();
    for (const auto& p : t.points())
        if (!p.refreshed) free_from = std::min(free_from, p.retention);
    return r < free_from;
}

} // namespace config_detail

// Applies the device model to LRSC timing and fills refresh defaults.
inline void derive_dependent(HierarchyConfig& c, bool lrsc_wl_explicit, bool refresh_enabled_explicit,
                             bool refresh_period_explicit) {
    if (c.is_rrap()) {
        const auto table = config_detail::design_table_for(c);
        if (!lrsc_wl_explicit) c.lrsc.tech.write_latency_cycles = table.write_latency_cycles(c.lrsc_retention, c.clock_hz);
        if (!refresh_enabled_explicit) c.l2_refresh.enabled = config_detail::retention_needs_refresh(table, c.lrsc_retention);
        if (!refresh_period_explicit) c.l2_refresh.period = c.lrsc_retention;
        c.l2_refresh.per_line_refresh_cycles = c.lrsc.tech.write_latency_cycles;
    } else {
        if (!refresh_enabled_explicit) c.l2_refresh.enabled = c.l2_kind == L2Kind::Edram;
        if (!refresh_period_explicit) c.l2_refresh.period = kEdramRefreshPeriod;
        c.l2_refresh.per_line_refresh_cycles = c.l2.tech.write_latency_cycles;
    }
    if (c.llc_refresh.period == 0.0) c.llc_refresh.period = kEdramRefreshPeriod;
    c.llc_refresh.per_line_refresh_cycles = c.llc.tech.write_latency_cycles;
}

inline const std::vector<std::string>& builtin_config_names() {
    static const std::vector<std::string> names = {"sram-baseline", "edram-baseline", "sttram-baseline", "rrap",
                                                   "rrap-design1",  "rrap-design3",   "lrsc-only"};
    return names;
}

inline std::string canonical_config_name(const std::string& n) {
    if (n == "sram") return "sram-baseline";
    if (n == "edram") return "edram-baseline";
    if (n == "sttram") return "sttram-baseline";
    return n;
}

inline HierarchyConfig builtin_config(const std::string& requested, double clock_hz = 3e9) {
    const std::string name = canonical_config_name(requested);
    HierarchyConfig c;
    c.name = name;
    c.clock_hz = clock_hz;
    c.l1 = array_preset("sram-32k", clock_hz);
    c.llc = array_preset("edram-96m", clock_hz);
    if (name == "sram-baseline") {
        c.l2_kind = L2Kind::Sram;
        c.l2 = array_preset("sram-512k", clock_hz);
    } else if (name == "edram-baseline") {
        c.l2_kind = L2Kind::Edram;
        c.l2 = array_preset("edram-1m", clock_hz);
    } else if (name == "sttram-baseline") {
        c.l2_kind = L2Kind::SttRam;
        c.l2 = array_preset("sttram-1m", clock_hz);
    } else if (name == "rrap" || name == "rrap-design1" || name == "rrap-design3" || name == "lrsc-only") {
        c.l2_kind = L2Kind::Rrap;
        c.lrsc = array_preset("lrsc-512k", clock_hz);
        c.hrsc = array_preset("hrsc-512k", clock_hz);
        if (name == "rrap-design1") c.lrsc_retention = 140e-3;
        if (name == "rrap-design3") c.lrsc_retention = 1e-3;
        if (name == "lrsc-only") c.nr_th.reset();
    } else {
        std::string known;
        for (const auto& n : builtin_config_names()) known += (known.empty() ? "" : ", ") + n;
        throw ConfigError("unknown configuration '" + requested + "' (built-ins: " + known + ")");
    }
    derive_dependent(c, false, false, false);
    return c;
}

// Latency: whole cycles ("4", "4cycles") or a time converted by ceiling.
inline Cycle parse_latency(const std::string& text, double clock_hz) {
    auto [num, suf] = units::detail::split_number(text);
    if (suf.empty() || suf == "cycles" || suf == "cycle") return units::parse_cycles(text);
    return units::seconds_to_cycles_ceil(units::parse_seconds(text), clock_hz);
}

inline bool parse_bool(const std::string& s) {
    if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
    if (s == "false" || s == "no" || s == "off" || s == "0") return false;
    throw ConfigError("expected a boolean, got '" + s + "'");
}

// INI loader. Sections: config, processor, l1, l2, llc, memory, rrap,
// refresh, device. The starting point is a built-in configuration chosen by
// config.base or, failing that, by l2.variant (default rrap); keys override it.
inline HierarchyConfig parse_config(std::istream& in, const std::string& origin = "<config>") {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(origin + ": " + e.message() + (e.line() ? " at line " + std::to_string(e.line()) : ""));
    }

    std::vector<std::string> errs;
    std::set<std::string> used;
    auto get = [&](const std::string& sec, const std::string& key) -> std::optional<std::string> {
        auto s = tree.get_child_optional(sec);
        if (!s) return std::nullopt;
        auto v = s->get_optional<std::string>(key);
        if (!v) return std::nullopt;
        used.insert(sec + "." + key);
        return std::string(units::detail::trim(*v));
    };
    auto apply = [&](const std::string& sec, const std::string& key, const std::function<void(const std::string&)>& f) {
        auto v = get(sec, key);
        if (!v) return false;
        try {
            f(*v);
        } catch (const std::exception& e) {
            errs.push_back(sec + "." + key + ": " + e.what());
        }
        return true;
    };

    double clock = 3e9;
    apply("processor", "clock", [&](const std::string& v) { clock = units::parse_hertz(v); });
    if (!(clock > 0.0)) {
        errs.emplace_back("processor.clock must be positive");
        clock = 3e9;
    }

    std::string base;
    if (auto b = get("config", "base")) base = *b;
    std::optional<L2Kind> kind;
    apply("l2", "variant", [&](const std::string& v) { kind = parse_l2_kind(v); });
    if (base.empty()) {
        const L2Kind k = kind.value_or(L2Kind::Rrap);
        base = k == L2Kind::Sram ? "sram-baseline"
             : k == L2Kind::Edram ? "edram-baseline"
             : k == L2Kind::SttRam ? "sttram-baseline" : "rrap";
    }
    HierarchyConfig c;
    try {
        c = builtin_config(base, clock);
    } catch (const ConfigError& e) {
        throw ConfigError(origin + ": config.base: " + e.what());
    }
    if (kind && *kind != c.l2_kind) {
        c.l2_kind = *kind;
        if (*kind == L2Kind::Rrap) {
            c.lrsc = array_preset("lrsc-512k", clock);
            c.hrsc = array_preset("hrsc-512k", clock);
        } else {
            c.l2 = array_preset(*kind == L2Kind::Sram ? "sram-512k" : *kind == L2Kind::Edram ? "edram-1m" : "sttram-1m",
                                clock);
        }
    }
    apply("config", "name", [&](const std::string& v) { c.name = v; });
    apply("processor", "cores", [&](const std::string& v) { c.cores = static_cast<std::uint32_t>(units::parse_u64(v)); });

    bool lrsc_wl_explicit = false;
    auto array_keys = [&](const std::string& sec, const std::string& prefix, ArrayConfig& a, bool* wl_explicit) {
        apply(sec, prefix + "preset", [&](const std::string& v) { a = array_preset(v, clock); });
        bool tag_explicit = false;
        apply(sec, prefix + "capacity", [&](const std::string& v) { a.geometry.capacity_bytes = units::parse_bytes(v); });
        apply(sec, prefix + "line", [&](const std::string& v) { a.geometry.line_bytes = units::parse_bytes(v); });
        apply(sec, prefix + "associativity",
              [&](const std::string& v) { a.geometry.associativity = static_cast<std::uint32_t>(units::parse_u64(v)); });
        apply(sec, prefix + "banks",
              [&](const std::string& v) { a.geometry.banks = static_cast<std::uint32_t>(units::parse_u64(v)); });
        apply(sec, prefix + "read_latency", [&](const std::string& v) { a.tech.read_latency_cycles = parse_latency(v, clock); });
        const bool wl = apply(sec, prefix + "write_latency",
                              [&](const std::string& v) { a.tech.write_latency_cycles = parse_latency(v, clock); });
        if (wl_explicit) *wl_explicit = wl;
        apply(sec, prefix + "read_energy", [&](const std::string& v) { a.tech.read_energy = units::parse_energy(v); });
        apply(sec, prefix + "write_energy", [&](const std::string& v) { a.tech.write_energy = units::parse_energy(v); });
        tag_explicit = apply(sec, prefix + "tag_energy", [&](const std::string& v) { a.tech.tag_read_energy = units::parse_energy(v); });
        if (!tag_explicit) a.tech.tag_read_energy = default_tag_energy(a.tech.read_energy);
        apply(sec, prefix + "leakage", [&](const std::string& v) { a.tech.leakage_mw = units::parse_milliwatts(v); });
        apply(sec, prefix + "area", [&](const std::string& v) {
            auto [num, suf] = units::detail::split_number(v);
            if (suf != "mm2") throw ConfigError("area needs an mm2 suffix");
            a.tech.area_mm2 = units::parse_double(num);
        });
    };
    array_keys("l1", "", c.l1, nullptr);
    if (c.is_rrap()) {
        array_keys("rrap", "lrsc_", c.lrsc, &lrsc_wl_explicit);
        array_keys("rrap", "hrsc_", c.hrsc, nullptr);
    } else {
        array_keys("l2", "", c.l2, nullptr);
    }
    array_keys("llc", "", c.llc, nullptr);
    apply("llc", "refresh", [&](const std::string& v) { c.llc_refresh.enabled = parse_bool(v); });
    apply("llc", "refresh_period", [&](const std::string& v) { c.llc_refresh.period = units::parse_seconds(v); });

    apply("memory", "latency", [&](const std::string& v) { c.memory_latency_cycles = parse_latency(v, clock); });
    apply("memory", "l2_to_l1", [&](const std::string& v) { c.l2_to_l1_transfer_cycles = parse_latency(v, clock); });
    apply("memory", "llc_to_l2", [&](const std::string& v) { c.llc_to_l2_transfer_cycles = parse_latency(v, clock); });
    apply("memory", "mem_to_l2", [&](const std::string& v) { c.mem_to_l2_transfer_cycles = parse_latency(v, clock); });

    apply("rrap", "nr_th", [&](const std::string& v) {
        if (v == "inf") c.nr_th.reset();
        else c.nr_th = static_cast<std::uint32_t>(units::parse_u64(v));
    });

    bool refresh_enabled_explicit = false, refresh_period_explicit = false;
    apply("refresh", "enabled", [&](const std::string& v) {
        if (v == "auto") return;
        c.l2_refresh.enabled = parse_bool(v);
        refresh_enabled_explicit = true;
    });
    apply("refresh", "period", [&](const std::string& v) {
        if (v == "auto") return;
        c.l2_refresh.period = units::parse_seconds(v);
        refresh_period_explicit = true;
    });
    apply("refresh", "scope", [&](const std::string& v) { c.l2_refresh.scope = parse_refresh_scope(v); });

    auto& cal = c.calibration;
    apply("device", "lrsc_retention", [&](const std::string& v) { c.lrsc_retention = units::parse_seconds(v); });
    apply("device", "hrsc_retention", [&](const std::string& v) { c.hrsc_retention = units::parse_seconds(v); });
    apply("device", "t1", [&](const std::string& v) { cal.fitting_constant = units::parse_seconds(v); });
    apply("device", "temperature", [&](const std::string& v) {
        auto [num, suf] = units::detail::split_number(v);
        if (suf != "K") throw ConfigError("temperature needs a K suffix");
        cal.temperature = units::parse_double(num);
    });
    apply("device", "saturation_magnetization", [&](const std::string& v) {
        auto [num, suf] = units::detail::split_number(v);
        if (suf != "A/m") throw ConfigError("saturation magnetization needs an A/m suffix");
        cal.saturation_magnetization = units::parse_double(num);
    });
    apply("device", "polarization", [&](const std::string& v) { cal.tunneling_polarization = units::parse_double(v); });
    apply("device", "damping", [&](const std::string& v) { cal.damping = units::parse_double(v); });

    for (const auto& [sec, body] : tree) {
        static const std::set<std::string> sections = {"config", "processor", "l1",      "l2",    "llc",
                                                       "memory", "rrap",      "refresh", "device"};
        if (!sections.count(sec)) {
            errs.push_back("unknown section [" + sec + "]");
            continue;
        }
        for (const auto& [key, v] : body)
            if (!used.count(sec + "." + key) && !(sec == "config" && key == "base"))
                errs.push_back("unknown or inapplicable key " + sec + "." + key);
    }

    if (errs.empty()) {
        try {
            derive_dependent(c, lrsc_wl_explicit, refresh_enabled_explicit, refresh_period_explicit);
        } catch (const std::exception& e) {
            errs.emplace_back(e.what());
        }
    }
    if (errs.empty()) {
        auto more = c.validation_errors();
        errs.insert(errs.end(), more.begin(), more.end());
    }
    if (!errs.empty()) {
        std::string msg = origin + ": invalid configuration:";
        for (const auto& e : errs) msg += "\n  - " + e;
        throw ConfigError(msg);
    }
    return c;
}

inline HierarchyConfig parse_config_text(const std::string& text, const std::string& origin = "<config>") {
    std::istringstream in(text);
    return parse_config(in, origin);
}

inline HierarchyConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in, path);
}

} // namespace rrap
