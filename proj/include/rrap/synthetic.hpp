#pragma once

// Parameterized synthetic workloads: per-line read-reuse mix, a share of
// IRRA lines (written once, then only read, at least 65 times), and a DSI
// distribution class shaping how long each regular line's write-to-last-read
// interval lasts. Timestamps are instruction slots on an in-order core, so a
// core's timeline spans `instruction_count` cycles.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "rrap/dsi.hpp"
#include "rrap/error.hpp"
#include "rrap/trace.hpp"

namespace rrap {

enum class DsiClass { Unimodal, Bimodal, Symmetric };

inline DsiClass parse_dsi_class(const std::string& s) {
    if (s == "unimodal") return DsiClass::Unimodal;
    if (s == "bimodal") return DsiClass::Bimodal;
    if (s == "symmetric") return DsiClass::Symmetric;
    throw ConfigError("dsi class must be unimodal, bimodal or symmetric, got '" + s + "'");
}

inline const char* to_string(DsiClass c) {
    switch (c) {
    case DsiClass::Unimodal: return "unimodal";
    case DsiClass::Bimodal: return "bimodal";
    default: return "symmetric";
    }
}

struct SyntheticSpec {
    std::uint64_t seed = 1;
    std::uint32_t cores = 1;
    std::uint64_t instruction_count = 1'000'000;  // per core
    double read_fraction = 0.8;                   // of regular-line references
    // Share of lines per reuse bucket {0, 1, 2-63, >=64}.
    std::array<double, dsi::kReuseBuckets> reuse_histogram{0.50, 0.20, 0.25, 0.05};
    double irra_fraction = 0.0155;  // share of lines; drawn from the >=64 bucket
    DsiClass dsi_class = DsiClass::Unimodal;
    std::uint64_t footprint_bytes = 1 << 20;
    std::uint64_t line_bytes = 64;
    double clock_hz = 3e9;
    std::uint64_t base_address = 0x10000000;
    std::uint64_t max_reads = 256;  // upper end of the >=64 bucket

    void validate() const {
        if (line_bytes == 0 || (line_bytes & (line_bytes - 1)))
            throw ConfigError("line size must be a power of two");
        if (footprint_bytes < line_bytes) throw ConfigError("footprint smaller than one cache line");
        if (cores == 0) throw ConfigError("at least one core required");
        double sum = 0.0;
        for (double p : reuse_histogram) {
            if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("reuse histogram probabilities must lie in [0,1]");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("reuse histogram must sum to 1");
        if (!(read_fraction > 0.0 && read_fraction <= 1.0)) throw ConfigError("read fraction must lie in (0,1]");
        if (!(irra_fraction >= 0.0 && irra_fraction <= 1.0)) throw ConfigError("irra fraction must lie in [0,1]");
        if (irra_fraction > reuse_histogram[3] + 1e-12)
            throw ConfigError("irra fraction exceeds the >=64 reuse bucket");
        if (max_reads < 65) throw ConfigError("max reads must be at least 65");
        if (!(clock_hz > 0.0)) throw ConfigError("clock must be positive");
    }
};

namespace synth_detail {

// Portable draws on top of mt19937_64 (std distributions are not specified
// bit-for-bit across standard libraries).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : g_(seed) {}
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x;
        do x = g_(); while (x >= limit);
        return x % n;
    }
    std::uint64_t between(std::uint64_t lo, std::uint64_t hi) { return lo + below(hi - lo + 1); }
    double unit() { return static_cast<double>(g_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 g_;
};

// Largest-remainder apportionment of n items over weights.
template <std::size_t N>
std::array<std::uint64_t, N> apportion(std::uint64_t n, const std::array<double, N>& w) {
    std::array<std::uint64_t, N> out{};
    std::array<double, N> rem{};
    std::uint64_t used = 0;
    for (std::size_t i = 0; i < N; ++i) {
        const double exact = w[i] * static_cast<double>(n);
        out[i] = static_cast<std::uint64_t>(std::floor(exact + 1e-9));
        rem[i] = exact - static_cast<double>(out[i]);
        used += out[i];
    }
    while (used < n) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < N; ++i)
            if (rem[i] > rem[best] + 1e-12) best = i;
        ++out[best];
        rem[best] = -1.0;
        ++used;
    }
    while (used > n) {
        for (std::size_t i = N; i-- > 0;)
            if (out[i] && used > n) { --out[i]; --used; }
    }
    return out;
}

inline std::array<double, dsi::kBuckets> class_mass(DsiClass c) {
    switch (c) {
    case DsiClass::Unimodal: return {0.80, 0.08, 0.05, 0.04, 0.03};
    case DsiClass::Bimodal: return {0.45, 0.04, 0.03, 0.03, 0.45};
    default: return {0.20, 0.20, 0.20, 0.20, 0.20};
    }
}

struct PendingEvent {
    Cycle time;
    std::uint32_t line;
    std::uint32_t seq;
    std::uint32_t core;
    AccessKind kind;
};

} // namespace synth_detail

inline std::vector<TraceEvent> generate(const SyntheticSpec& spec) {
    using namespace synth_detail;
    spec.validate();
    if (spec.instruction_count == 0) return {};

    Rng rng(spec.seed);
    const std::uint64_t lines = spec.footprint_bytes / spec.line_bytes;
    if (lines > std::uint64_t{0xffffffff}) throw ConfigError("footprint too large");
    const Cycle horizon = spec.instruction_count;

    // Bucket quotas, IRRA lines taken from the top bucket.
    const auto quota = apportion(lines, spec.reuse_histogram);
    const std::uint64_t irra = std::min<std::uint64_t>(
        quota[3], static_cast<std::uint64_t>(std::llround(spec.irra_fraction * static_cast<double>(lines))));

    std::vector<std::uint32_t> order(lines);
    for (std::uint64_t i = 0; i < lines; ++i) order[i] = static_cast<std::uint32_t>(i);
    for (std::uint64_t i = lines; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    struct LinePlan {
        std::uint32_t line;
        std::size_t bucket;
        bool irra;
        std::uint64_t reads;
        bool first_write = false;
        std::uint64_t extra_writes = 0;
    };
    std::vector<LinePlan> plan;
    plan.reserve(lines);
    {
        std::size_t pos = 0;
        const std::array<std::size_t, 4> fill_order = {3, 2, 1, 0};
        for (std::size_t b : fill_order) {
            for (std::uint64_t n = 0; n < quota[b]; ++n, ++pos) {
                const bool is_irra = b == 3 && n < irra;
                std::uint64_t reads = 1;
                if (b == 1) reads = 2;
                else if (b == 2) reads = rng.between(3, 63);
                else if (b == 3) reads = rng.between(65, spec.max_reads);
                plan.push_back({order[pos], b, is_irra, reads});
            }
        }
    }

    // Write budget over regular lines: first-reference writes, then extra
    // writes after the last read. Heavy regular lines always get one, which
    // is what separates them from IRRA lines.
    std::uint64_t regular_reads = 0;
    for (const auto& p : plan)
        if (!p.irra) regular_reads += p.reads;
    std::uint64_t budget = static_cast<std::uint64_t>(
        std::llround(static_cast<double>(regular_reads) * (1.0 - spec.read_fraction) / spec.read_fraction));
    std::vector<std::size_t> regular;
    for (std::size_t i = 0; i < plan.size(); ++i)
        if (!plan[i].irra) regular.push_back(i);
    for (std::size_t i : regular) {
        if (!budget) break;
        plan[i].first_write = true;
        --budget;
    }
    for (std::size_t k = 0; budget && !regular.empty(); k = (k + 1) % regular.size(), --budget)
        ++plan[regular[k]].extra_writes;
    for (auto& p : plan)
        if (!p.irra && p.bucket == 3 && p.extra_writes == 0) p.extra_writes = 1;

    const auto mass = class_mass(spec.dsi_class);
    const dsi::Bounds bounds;
    std::array<double, dsi::kBuckets + 1> edges{0.0};
    for (std::size_t i = 0; i < 4; ++i) edges[i + 1] = bounds.seconds[i];
    edges[5] = 2.0 * bounds.seconds[3];

    std::vector<PendingEvent> evs;
    for (const auto& p : plan) {
        std::uint32_t seq = 0;
        const std::uint32_t line_core = static_cast<std::uint32_t>(rng.below(spec.cores));
        auto core = [&] { return p.irra ? static_cast<std::uint32_t>(rng.below(spec.cores)) : line_core; };
        auto push = [&](Cycle t, AccessKind k) { evs.push_back({t, p.line, seq++, core(), k}); };

        if (p.irra) {
            const Cycle t0 = rng.below(std::max<Cycle>(1, horizon / 20));
            push(t0, AccessKind::Write);
            for (std::uint64_t r = 0; r < p.reads; ++r)
                push(t0 + 1 + rng.below(std::max<Cycle>(1, horizon - t0 - 1)), AccessKind::Read);
            continue;
        }

        // Interval length from the class mass, clipped to the timeline.
        double u = rng.unit(), acc = 0.0;
        std::size_t b = 0;
        for (; b + 1 < dsi::kBuckets; ++b) {
            acc += mass[b];
            if (u < acc) break;
        }
        const double secs = edges[b] + rng.unit() * (edges[b + 1] - edges[b]);
        Cycle span = static_cast<Cycle>(secs * spec.clock_hz);
        span = std::min<Cycle>(span, horizon - 1);
        const Cycle t0 = rng.below(horizon - span);
        const Cycle last = t0 + span;

        std::uint64_t reads_left = p.reads;
        if (p.first_write) {
            push(t0, AccessKind::Write);
        } else {
            push(t0, AccessKind::Read);
            --reads_left;
        }
        for (std::uint64_t r = 0; r + 1 < reads_left; ++r)
            push(span ? t0 + 1 + rng.below(span) : t0, AccessKind::Read);
        if (reads_left) push(last, AccessKind::Read);
        for (std::uint64_t w = 0; w < p.extra_writes; ++w)
            push(last + 1 + rng.below(std::max<Cycle>(1, horizon - last - 1)), AccessKind::Write);
    }

    std::sort(evs.begin(), evs.end(), [](const PendingEvent& a, const PendingEvent& b) {
        if (a.time != b.time) return a.time < b.time;
        if (a.line != b.line) return a.line < b.line;
        return a.seq < b.seq;
    });

    // Per core: one instruction slot per memory reference, gaps become NonMem runs.
    std::vector<std::vector<TraceEvent>> per_core(spec.cores);
    {
        std::vector<std::vector<const PendingEvent*>> mem(spec.cores);
        for (const auto& e : evs) mem[e.core].push_back(&e);
        for (std::uint32_t c = 0; c < spec.cores; ++c) {
            const auto& m = mem[c];
            if (m.size() > horizon)
                throw ConfigError("instruction count " + std::to_string(horizon) + " too small for " +
                                  std::to_string(m.size()) + " memory references on core " + std::to_string(c));
            std::vector<Cycle> slot(m.size());
            for (std::size_t i = 0; i < m.size(); ++i)
                slot[i] = i ? std::max(m[i]->time, slot[i - 1] + 1) : m[i]->time;
            for (std::size_t i = m.size(); i-- > 0;)
                slot[i] = std::min<Cycle>(slot[i], horizon - (m.size() - i));
            for (std::size_t i = 1; i < m.size(); ++i)  // backward clip may collide; re-space
                if (slot[i] <= slot[i - 1]) slot[i] = slot[i - 1] + 1;

            auto& out = per_core[c];
            Cycle next = 0;
            for (std::size_t i = 0; i < m.size(); ++i) {
                if (slot[i] > next) out.push_back({next, c, AccessKind::NonMem, 0, slot[i] - next});
                const std::uint64_t offset = 8 * rng.below(spec.line_bytes / 8 ? spec.line_bytes / 8 : 1);
                out.push_back({slot[i], c, m[i]->kind,
                               spec.base_address + std::uint64_t{m[i]->line} * spec.line_bytes + offset, 1});
                next = slot[i] + 1;
            }
            if (next < horizon) out.push_back({next, c, AccessKind::NonMem, 0, horizon - next});
        }
    }

    std::vector<TraceEvent> trace;
    for (auto& v : per_core) trace.insert(trace.end(), v.begin(), v.end());
    sort_for_replay(trace);
    return trace;
}

// Named workloads shipped with the simulator.
inline SyntheticSpec bundled_workload(const std::string& name) {
    SyntheticSpec s;
    if (name == "irra-heavy") {
        // Footprint four times the 512KB L2. The exclusively read lines alone
        // (30% of the footprint) overflow one L2 partition, so they keep
        // missing to the LLC until HRSC takes them. ~2.3M references.
        s.seed = 7;
        s.instruction_count = 4'000'000;
        s.read_fraction = 0.8;
        s.reuse_histogram = {0.10, 0.05, 0.55, 0.30};
        s.irra_fraction = 0.30;
        s.footprint_bytes = 2u << 20;
        s.dsi_class = DsiClass::Unimodal;
        return s;
    }
    if (name == "smoke") {
        s.seed = 1;
        s.instruction_count = 1200;
        s.footprint_bytes = 4u << 10;
        s.reuse_histogram = {0.50, 0.25, 0.25, 0.0};
        s.irra_fraction = 0.0;
        return s;
    }
    throw ConfigError("unknown bundled workload '" + name + "' (known: irra-heavy, smoke)");
}

} // namespace rrap
