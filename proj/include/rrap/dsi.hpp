#pragma once

// Data Stability Interval analysis and read-reuse statistics.
//
// A block's lifetime is split into segments, each opened by a write (a fill
// counts as one) and closed by the next write, an eviction or the end of
// the history. A segment's interval runs from its write to its last read;
// the block's DSI is the largest such interval.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "rrap/trace.hpp"
#include "rrap/units.hpp"

namespace rrap::dsi {

enum class EventKind : std::uint8_t { Write, Read, Evict };

struct HistoryEvent {
    Cycle cycle = 0;
    EventKind kind = EventKind::Read;
};

struct BlockHistory {
    std::uint64_t address = 0;
    std::vector<HistoryEvent> events;
};

struct DsiResult {
    std::uint64_t address = 0;
    Cycle dsi = 0;
    Cycle start = 0;  // write opening the longest interval
    Cycle end = 0;    // last read of that segment
};

inline DsiResult compute_dsi(const BlockHistory& h) {
    if (h.events.empty()) throw std::invalid_argument("compute_dsi: empty block history");
    DsiResult best{h.address, 0, h.events.front().cycle, h.events.front().cycle};
    // Reads ahead of any write belong to the implicit fill at the first event.
    Cycle seg_start = h.events.front().cycle;
    Cycle prev = seg_start;
    bool closed = false;
    for (const auto& ev : h.events) {
        if (ev.cycle < prev) throw std::invalid_argument("compute_dsi: history not cycle-ordered");
        if (closed) throw std::invalid_argument("compute_dsi: events after eviction");
        prev = ev.cycle;
        switch (ev.kind) {
        case EventKind::Write: seg_start = ev.cycle; break;
        case EventKind::Read:
            if (ev.cycle - seg_start > best.dsi) best = {h.address, ev.cycle - seg_start, seg_start, ev.cycle};
            break;
        case EventKind::Evict: closed = true; break;
        }
    }
    return best;
}

struct Bounds {
    std::array<double, 4> seconds{2.4e-3, 4.8e-3, 9.6e-3, 19.2e-3};

    void validate() const {
        for (std::size_t i = 0; i < seconds.size(); ++i) {
            if (!(seconds[i] > 0.0)) throw std::invalid_argument("DSI bucket bounds must be positive");
            if (i && !(seconds[i] > seconds[i - 1]))
                throw std::invalid_argument("DSI bucket bounds must be strictly ascending");
        }
    }
};

inline constexpr std::size_t kBuckets = 5;

inline std::size_t bucket_of(Cycle dsi_cycles, const Bounds& b, double clock_hz) {
    const double s = static_cast<double>(dsi_cycles) / clock_hz;
    std::size_t i = 0;
    while (i < b.seconds.size() && s >= b.seconds[i]) ++i;
    return i;
}

struct Distribution {
    std::array<std::uint64_t, kBuckets> counts{};
    std::array<double, kBuckets> fractions{};
    std::uint64_t blocks = 0;
};

inline Distribution dsi_distribution(std::span<const DsiResult> results, const Bounds& bounds, double clock_hz) {
    bounds.validate();
    Distribution d;
    for (const auto& r : results) ++d.counts[bucket_of(r.dsi, bounds, clock_hz)];
    d.blocks = results.size();
    if (d.blocks)
        for (std::size_t i = 0; i < kBuckets; ++i)
            d.fractions[i] = static_cast<double>(d.counts[i]) / static_cast<double>(d.blocks);
    return d;
}

inline Distribution dsi_distribution(std::span<const BlockHistory> histories, const Bounds& bounds, double clock_hz) {
    std::vector<DsiResult> rs;
    rs.reserve(histories.size());
    for (const auto& h : histories) rs.push_back(compute_dsi(h));
    return dsi_distribution(std::span<const DsiResult>(rs), bounds, clock_hz);
}

// Ideal retention time: the largest DSI over all blocks, in seconds.
inline double ideal_retention(std::span<const DsiResult> results, double clock_hz) {
    if (results.empty()) throw std::invalid_argument("ideal_retention: no blocks");
    Cycle m = 0;
    for (const auto& r : results) m = std::max(m, r.dsi);
    return static_cast<double>(m) / clock_hz;
}

inline double ideal_retention(std::span<const BlockHistory> histories, double clock_hz) {
    if (histories.empty()) throw std::invalid_argument("ideal_retention: no blocks");
    Cycle m = 0;
    for (const auto& h : histories) m = std::max(m, compute_dsi(h).dsi);
    return static_cast<double>(m) / clock_hz;
}

// Standalone mode: one history per line address over the whole trace. The
// first reference to a line is its fill.
inline std::vector<BlockHistory> histories_from_trace(std::span<const TraceEvent> trace,
                                                      std::uint64_t line_bytes = 64) {
    std::vector<TraceEvent> ordered(trace.begin(), trace.end());
    sort_for_replay(ordered);
    std::map<std::uint64_t, BlockHistory> by_line;
    for (const auto& ev : ordered) {
        if (ev.kind == AccessKind::NonMem) continue;
        const std::uint64_t line = ev.address & ~(line_bytes - 1);
        auto [it, fresh] = by_line.try_emplace(line);
        BlockHistory& h = it->second;
        if (fresh) {
            h.address = line;
            h.events.push_back({ev.cycle, EventKind::Write});
            if (ev.kind == AccessKind::Write) continue;
        }
        h.events.push_back({ev.cycle, ev.kind == AccessKind::Write ? EventKind::Write : EventKind::Read});
    }
    std::vector<BlockHistory> out;
    out.reserve(by_line.size());
    for (auto& [addr, h] : by_line) out.push_back(std::move(h));
    return out;
}

// Simulator mode: builds one history per array residency from fill, access
// and eviction callbacks and reduces each to its DSI when the residency ends.
class ResidencyTracker {
public:
    void fill(std::uint64_t line, Cycle t) {
        auto& h = live_[line];
        if (!h.events.empty()) close(line, h, t);
        h.address = line;
        h.events.push_back({t, EventKind::Write});
    }
    void read(std::uint64_t line, Cycle t) { append(line, {t, EventKind::Read}); }
    void write(std::uint64_t line, Cycle t) { append(line, {t, EventKind::Write}); }
    void evict(std::uint64_t line, Cycle t) {
        auto it = live_.find(line);
        if (it == live_.end()) return;
        close(line, it->second, t);
        live_.erase(it);
    }
    void finish(Cycle t) {
        std::vector<std::uint64_t> keys;
        keys.reserve(live_.size());
        for (auto& [k, h] : live_) keys.push_back(k);
        std::sort(keys.begin(), keys.end());
        for (auto k : keys) close(k, live_[k], t);
        live_.clear();
    }
    const std::vector<DsiResult>& results() const { return done_; }

private:
    void append(std::uint64_t line, HistoryEvent ev) {
        auto it = live_.find(line);
        if (it == live_.end()) return;
        auto& evs = it->second.events;
        if (!evs.empty() && ev.cycle < evs.back().cycle) ev.cycle = evs.back().cycle;
        evs.push_back(ev);
    }
    void close(std::uint64_t, BlockHistory& h, Cycle t) {
        if (!h.events.empty() && t < h.events.back().cycle) t = h.events.back().cycle;
        h.events.push_back({t, EventKind::Evict});
        done_.push_back(compute_dsi(h));
        h.events.clear();
    }

    std::unordered_map<std::uint64_t, BlockHistory> live_;
    std::vector<DsiResult> done_;
};

// Read-reuse buckets by reuse count (reads - 1): {0, 1, 2-63, >=64}.
inline constexpr std::size_t kReuseBuckets = 4;
inline constexpr std::uint64_t kIrraMinReads = 64;

inline std::size_t reuse_bucket(std::uint64_t reads) {
    const std::uint64_t reuse = reads > 0 ? reads - 1 : 0;
    if (reuse == 0) return 0;
    if (reuse == 1) return 1;
    if (reuse < 64) return 2;
    return 3;
}

struct ReuseStats {
    std::array<std::uint64_t, kReuseBuckets> line_counts{};
    std::array<double, kReuseBuckets> line_fractions{};
    std::uint64_t lines = 0;
    std::uint64_t irra_lines = 0;
    double irra_fraction = 0.0;         // share of lines
    std::uint64_t reads = 0;
    std::uint64_t irra_reads = 0;
    double exclusive_read_share = 0.0;  // share of all reads landing on IRRA lines
};

// IRRA line: at least 64 reads and no write after the line's first reference.
inline ReuseStats reuse_stats(std::span<const TraceEvent> trace, std::uint64_t line_bytes = 64) {
    struct PerLine {
        std::uint64_t reads = 0, later_writes = 0;
    };
    std::unordered_map<std::uint64_t, PerLine> lines;
    for (const auto& ev : trace) {
        if (ev.kind == AccessKind::NonMem) continue;
        const std::uint64_t line = ev.address & ~(line_bytes - 1);
        auto [it, fresh] = lines.try_emplace(line);
        if (ev.kind == AccessKind::Read) ++it->second.reads;
        else if (!fresh) ++it->second.later_writes;
    }
    ReuseStats s;
    s.lines = lines.size();
    for (const auto& [addr, p] : lines) {
        ++s.line_counts[reuse_bucket(p.reads)];
        s.reads += p.reads;
        if (p.reads >= kIrraMinReads && p.later_writes == 0) {
            ++s.irra_lines;
            s.irra_reads += p.reads;
        }
    }
    if (s.lines) {
        for (std::size_t i = 0; i < kReuseBuckets; ++i)
            s.line_fractions[i] = static_cast<double>(s.line_counts[i]) / static_cast<double>(s.lines);
        s.irra_fraction = static_cast<double>(s.irra_lines) / static_cast<double>(s.lines);
    }
    if (s.reads) s.exclusive_read_share = static_cast<double>(s.irra_reads) / static_cast<double>(s.reads);
    return s;
}

} // namespace rrap::dsi
