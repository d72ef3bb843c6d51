#pragma once

// Set-associative write-back array with true LRU, parameterized by a
// technology row. The same type backs L1, LRSC, HRSC, the LLC and every
// baseline L2; LLC instances additionally carry the per-line read counter
// (6-bit, saturating) and write flag (1-bit).

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rrap/energy.hpp"
#include "rrap/error.hpp"
#include "rrap/trace.hpp"
#include "rrap/units.hpp"

namespace rrap {

struct CacheGeometry {
    std::uint64_t capacity_bytes = 0;
    std::uint64_t line_bytes = 64;
    std::uint32_t associativity = 1;
    std::uint32_t banks = 1;

    void validate(const std::string& where = "cache") const {
        using units::is_power_of_two;
        if (!is_power_of_two(line_bytes)) throw ConfigError(where + ": line size must be a power of two");
        if (capacity_bytes == 0 || associativity == 0 || banks == 0)
            throw ConfigError(where + ": capacity, associativity and banks must be positive");
        if (capacity_bytes % (line_bytes * associativity * banks) != 0)
            throw ConfigError(where + ": capacity not divisible by line_bytes x associativity x banks");
    }

    std::uint64_t lines() const { return capacity_bytes / line_bytes; }
    std::uint64_t sets() const { return lines() / associativity; }
};

struct TechParams {
    Cycle read_latency_cycles = 0;
    Cycle write_latency_cycles = 0;
    Energy read_energy;
    Energy write_energy;
    Energy tag_read_energy;
    double leakage_mw = 0.0;
    double area_mm2 = 0.0;

    void validate(const std::string& where = "tech") const {
        if (read_energy < Energy{} || write_energy < Energy{} || tag_read_energy < Energy{} ||
            leakage_mw < 0.0 || area_mm2 < 0.0)
            throw ConfigError(where + ": technology parameters must be non-negative");
    }
};

// Bits of reuse state per LLC line and their share of a 64-byte line.
inline constexpr unsigned kReadCounterBits = 6;
inline constexpr unsigned kWriteCounterBits = 1;
inline constexpr std::uint8_t kReadCounterMax = (1u << kReadCounterBits) - 1;  // 63

inline double counter_overhead_fraction(std::uint64_t line_bytes = 64) {
    return static_cast<double>(kReadCounterBits + kWriteCounterBits) / static_cast<double>(line_bytes * 8);
}

struct CacheLineState {
    std::uint64_t tag = 0;
    std::uint64_t lru_stamp = 0;
    bool valid = false;
    bool dirty = false;
    std::uint8_t rc = 0;   // LLC only
    std::uint8_t wc = 0;   // LLC only
    std::uint8_t aux = 0;  // owner-defined tag (fill source for L2 replicas)
};

struct Victim {
    std::uint64_t address = 0;  // line-aligned byte address
    bool dirty = false;
    std::uint8_t aux = 0;
};

struct AccessResult {
    bool hit = false;
    std::optional<Victim> victim;
    Cycle latency_cycles = 0;
    Energy dynamic_energy;
};

// Per-array event counts. `charges` counts priced operations per energy
// category and is what the replay tally multiplies by unit energies.
struct ArrayStats {
    std::uint64_t read_hits = 0, read_misses = 0, write_hits = 0, write_misses = 0;
    std::uint64_t fills = 0, evictions = 0, dirty_evictions = 0, invalidations = 0;
    std::uint64_t refreshes = 0, refresh_stall_cycles = 0, bank_stall_cycles = 0;
    std::array<std::uint64_t, kEnergyCategories> charges{};

    friend bool operator==(const ArrayStats&, const ArrayStats&) = default;
};

class CacheArray {
public:
    CacheArray(std::string name, CacheGeometry geom, TechParams tech, bool reuse_counters = false)
        : name_(std::move(name)), geom_(geom), tech_(tech), counters_(reuse_counters) {
        geom_.validate(name_);
        tech_.validate(name_);
        sets_ = geom_.sets();
        lines_.assign(geom_.lines(), CacheLineState{});
        bank_busy_until_.assign(geom_.banks, 0);
    }

    const std::string& name() const { return name_; }
    const CacheGeometry& geometry() const { return geom_; }
    const TechParams& tech() const { return tech_; }
    bool has_reuse_counters() const { return counters_; }
    const EnergyLedger& energy() const { return ledger_; }
    EnergyLedger& energy() { return ledger_; }
    const ArrayStats& stats() const { return stats_; }
    ArrayStats& stats() { return stats_; }

    std::uint64_t line_address(std::uint64_t addr) const { return addr & ~(geom_.line_bytes - 1); }
    std::uint64_t set_of(std::uint64_t addr) const { return (addr / geom_.line_bytes) % sets_; }
    std::uint32_t bank_of_set(std::uint64_t set) const { return static_cast<std::uint32_t>(set % geom_.banks); }
    std::uint32_t bank_of(std::uint64_t addr) const { return bank_of_set(set_of(addr)); }
    // Physical line index (set-major) used by the refresh walk.
    std::uint64_t line_index(std::uint64_t set, std::uint32_t way) const { return set * geom_.associativity + way; }
    std::uint32_t bank_of_line_index(std::uint64_t index) const { return bank_of_set(index / geom_.associativity); }

    bool contains(std::uint64_t addr) const { return find(addr) != nullptr; }
    const CacheLineState* peek(std::uint64_t addr) const { return find(addr); }

    // Tag probe plus data access on hit. A hit refreshes recency and is
    // charged read or write energy by op kind; a write hit dirties the line.
    // A miss is charged one tag probe.
    AccessResult lookup(std::uint64_t addr, AccessKind op) {
        AccessResult r;
        CacheLineState* line = find(addr);
        const bool write = op == AccessKind::Write;
        if (line) {
            r.hit = true;
            line->lru_stamp = ++stamp_;
            if (write) {
                line->dirty = true;
                ++stats_.write_hits;
                r.dynamic_energy = charge(EnergyCategory::Write, tech_.write_energy);
                r.latency_cycles = tech_.write_latency_cycles;
            } else {
                ++stats_.read_hits;
                r.dynamic_energy = charge(EnergyCategory::Read, tech_.read_energy);
                r.latency_cycles = tech_.read_latency_cycles;
            }
        } else {
            write ? ++stats_.write_misses : ++stats_.read_misses;
            r.dynamic_energy = charge(EnergyCategory::TagProbe, tech_.tag_read_energy);
            r.latency_cycles = tech_.read_latency_cycles;
        }
        return r;
    }

    // Installs an absent line, evicting the set's LRU line when full. The
    // array write is charged to `category` (Write for demand fills,
    // Writeback for lines arriving from an upper level).
    AccessResult fill(std::uint64_t addr, bool dirty, EnergyCategory category = EnergyCategory::Write,
                      std::uint8_t aux = 0) {
        if (find(addr)) throw SimulationError(name_ + ": fill of resident line " + hex(addr));
        const std::uint64_t set = set_of(addr);
        CacheLineState* base = &lines_[set * geom_.associativity];
        CacheLineState* slot = nullptr;
        for (std::uint32_t w = 0; w < geom_.associativity; ++w)
            if (!base[w].valid) { slot = &base[w]; break; }
        AccessResult r;
        if (!slot) {
            slot = base;
            for (std::uint32_t w = 1; w < geom_.associativity; ++w)
                if (base[w].lru_stamp < slot->lru_stamp) slot = &base[w];
            r.victim = Victim{rebuild(slot->tag, set), slot->dirty, slot->aux};
            ++stats_.evictions;
            if (slot->dirty) ++stats_.dirty_evictions;
        }
        *slot = CacheLineState{};
        slot->valid = true;
        slot->dirty = dirty;
        slot->tag = tag_of(addr);
        slot->aux = aux;
        slot->lru_stamp = ++stamp_;
        ++stats_.fills;
        r.latency_cycles = tech_.write_latency_cycles;
        r.dynamic_energy = charge(category, tech_.write_energy);
        return r;
    }

    // Tag-only probe: charges tag energy, leaves recency and hit counters alone.
    bool tag_probe(std::uint64_t addr) {
        charge(EnergyCategory::TagProbe, tech_.tag_read_energy);
        return find(addr) != nullptr;
    }

    // Writes into a resident line without a demand lookup (upper-level
    // write-back). Returns false when the line is absent. Recency unchanged.
    bool absorb_writeback(std::uint64_t addr) {
        CacheLineState* line = find(addr);
        if (!line) return false;
        line->dirty = true;
        charge(EnergyCategory::Writeback, tech_.write_energy);
        return true;
    }

    void set_aux(std::uint64_t addr, std::uint8_t aux) {
        CacheLineState* line = find(addr);
        if (!line) throw SimulationError(name_ + ": aux update on absent line " + hex(addr));
        line->aux = aux;
    }

    std::optional<Victim> invalidate(std::uint64_t addr) {
        CacheLineState* line = find(addr);
        if (!line) return std::nullopt;
        Victim v{line_address(addr), line->dirty, line->aux};
        *line = CacheLineState{};
        ++stats_.invalidations;
        return v;
    }

    // Read: rc += 1 saturating at 63. Write: wc := 1.
    std::pair<std::uint8_t, std::uint8_t> bump_counters(std::uint64_t addr, AccessKind op) {
        if (!counters_) throw ConfigError(name_ + ": reuse counters exist only on the LLC");
        CacheLineState* line = find(addr);
        if (!line) throw SimulationError(name_ + ": counter bump on absent line " + hex(addr));
        if (op == AccessKind::Write) line->wc = 1;
        else if (op == AccessKind::Read && line->rc < kReadCounterMax) ++line->rc;
        return {line->rc, line->wc};
    }

    std::pair<std::uint8_t, std::uint8_t> counters(std::uint64_t addr) const {
        if (!counters_) throw ConfigError(name_ + ": reuse counters exist only on the LLC");
        const CacheLineState* line = find(addr);
        if (!line) throw SimulationError(name_ + ": counter read on absent line " + hex(addr));
        return {line->rc, line->wc};
    }

    // Write occupancy: an array write holds its bank for the write latency.
    Cycle bank_stall(std::uint64_t addr, Cycle now) const {
        const Cycle busy = bank_busy_until_[bank_of(addr)];
        return busy > now ? busy - now : 0;
    }
    void occupy_bank(std::uint64_t addr, Cycle now) {
        Cycle& busy = bank_busy_until_[bank_of(addr)];
        busy = std::max(busy, now) + tech_.write_latency_cycles;
    }

    void charge_refreshes(std::uint64_t count) {
        stats_.refreshes += count;
        stats_.charges[static_cast<std::size_t>(EnergyCategory::Refresh)] += count;
        ledger_.charge(EnergyCategory::Refresh, tech_.write_energy * count);
    }

    Energy unit_energy(EnergyCategory c) const {
        switch (c) {
        case EnergyCategory::Read: return tech_.read_energy;
        case EnergyCategory::TagProbe: return tech_.tag_read_energy;
        default: return tech_.write_energy;
        }
    }

    // Per-access replay tally: priced operation counts times unit energies.
    Energy replay_dynamic_energy() const {
        Energy e;
        for (std::size_t i = 0; i < kEnergyCategories; ++i)
            e += unit_energy(static_cast<EnergyCategory>(i)) * stats_.charges[i];
        return e;
    }

    std::uint64_t valid_lines() const {
        std::uint64_t n = 0;
        for (const auto& l : lines_) n += l.valid;
        return n;
    }

    template <typename F>
    void for_each_valid(F&& f) const {
        for (std::uint64_t i = 0; i < lines_.size(); ++i)
            if (lines_[i].valid) f(rebuild(lines_[i].tag, i / geom_.associativity), lines_[i]);
    }

private:
    static std::string hex(std::uint64_t a) {
        char buf[24];
        auto p = std::to_chars(buf, buf + sizeof buf, a, 16).ptr;
        return "0x" + std::string(buf, p);
    }

    std::uint64_t tag_of(std::uint64_t addr) const { return (addr / geom_.line_bytes) / sets_; }
    std::uint64_t rebuild(std::uint64_t tag, std::uint64_t set) const { return (tag * sets_ + set) * geom_.line_bytes; }

    CacheLineState* find(std::uint64_t addr) {
        return const_cast<CacheLineState*>(std::as_const(*this).find(addr));
    }
    const CacheLineState* find(std::uint64_t addr) const {
        const std::uint64_t set = set_of(addr);
        const std::uint64_t tag = tag_of(addr);
        const CacheLineState* base = &lines_[set * geom_.associativity];
        for (std::uint32_t w = 0; w < geom_.associativity; ++w)
            if (base[w].valid && base[w].tag == tag) return &base[w];
        return nullptr;
    }

    Energy charge(EnergyCategory c, Energy e) {
        ++stats_.charges[static_cast<std::size_t>(c)];
        ledger_.charge(c, e);
        return e;
    }

    std::string name_;
    CacheGeometry geom_;
    TechParams tech_;
    bool counters_;
    std::uint64_t sets_ = 0;
    std::vector<CacheLineState> lines_;
    std::vector<Cycle> bank_busy_until_;
    std::uint64_t stamp_ = 0;
    EnergyLedger ledger_;
    ArrayStats stats_;
};

} // namespace rrap
