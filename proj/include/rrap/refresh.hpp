#pragma once

// Sequential refresh walk for volatile arrays (retention-relaxed LRSC,
// eDRAM). Every physical line is refreshed once per period, in index order,
// with line k's window starting at floor(k * P / N) within each period. A
// window lasts one array write.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "rrap/error.hpp"
#include "rrap/units.hpp"

namespace rrap {

enum class RefreshScope {
    LineBank,   // a refresh blocks only the bank holding the refreshed line
    WholeArray  // a refresh blocks every access to the array
};

inline RefreshScope parse_refresh_scope(const std::string& s) {
    if (s == "line-bank") return RefreshScope::LineBank;
    if (s == "whole-array") return RefreshScope::WholeArray;
    throw ConfigError("refresh.scope must be line-bank or whole-array, got '" + s + "'");
}

inline const char* to_string(RefreshScope s) { return s == RefreshScope::LineBank ? "line-bank" : "whole-array"; }

struct RefreshPolicy {
    bool enabled = false;
    double period = 0.0;              // seconds
    Cycle per_line_refresh_cycles = 0;  // the array's write latency
    RefreshScope scope = RefreshScope::LineBank;
};

class RefreshSchedule {
public:
    RefreshSchedule(RefreshPolicy policy, std::uint64_t lines, std::uint32_t associativity,
                    std::uint32_t banks, double clock_hz, std::optional<double> retention = std::nullopt)
        : policy_(policy), lines_(lines), assoc_(associativity), banks_(banks) {
        if (!policy_.enabled) return;
        if (!(policy_.period > 0.0)) throw ConfigError("refresh period must be positive");
        if (lines_ == 0) throw ConfigError("refresh over an empty array");
        if (retention && policy_.period > *retention * (1.0 + 1e-12))
            throw ConfigError("refresh period " + units::format_double(policy_.period) +
                              " s exceeds the cell retention " + units::format_double(*retention) +
                              " s; lines would lose data between refreshes");
        period_cycles_ = units::seconds_to_cycles_floor(policy_.period, clock_hz);
        const unsigned __int128 walk = static_cast<unsigned __int128>(lines_) * policy_.per_line_refresh_cycles;
        if (walk >= period_cycles_)
            throw ConfigError("refresh walk of " + std::to_string(static_cast<std::uint64_t>(walk)) +
                              " cycles does not fit in the " + std::to_string(period_cycles_) +
                              "-cycle refresh period");
    }

    bool enabled() const { return policy_.enabled; }
    const RefreshPolicy& policy() const { return policy_; }
    Cycle period_cycles() const { return period_cycles_; }
    std::uint64_t lines() const { return lines_; }

    // Offset of line k's window inside each period.
    Cycle window_offset(std::uint64_t k) const {
        return static_cast<Cycle>(static_cast<unsigned __int128>(k) * period_cycles_ / lines_);
    }

    // The window of `line_index` that is in progress at `now`, or the next one.
    std::pair<Cycle, Cycle> next_refresh_window(std::uint64_t line_index, Cycle now) const {
        require_enabled();
        const Cycle off = window_offset(line_index);
        const Cycle w = policy_.per_line_refresh_cycles;
        Cycle start = off;
        if (now >= off + w) start = off + ((now - off - w) / period_cycles_ + 1) * period_cycles_;
        if (start + w <= now) start += period_cycles_;
        return {start, start + w};
    }

    // Cycles an access to `line_index` at `access_cycle` waits for refresh.
    Cycle conflict_stall(Cycle access_cycle, std::uint64_t line_index) const {
        if (!policy_.enabled || policy_.per_line_refresh_cycles == 0) return 0;
        const Cycle phase = access_cycle % period_cycles_;
        // Largest k whose window starts at or before `phase`.
        std::uint64_t k = static_cast<std::uint64_t>(
            ((static_cast<unsigned __int128>(phase) + 1) * lines_ - 1) / period_cycles_);
        if (k >= lines_) k = lines_ - 1;
        const Cycle end = window_offset(k) + policy_.per_line_refresh_cycles;
        if (phase >= end) return 0;
        if (policy_.scope == RefreshScope::LineBank && bank_of(k) != bank_of(line_index)) return 0;
        return end - phase;
    }

    // Line refreshes whose window has completed by `elapsed`.
    std::uint64_t completed_refreshes(Cycle elapsed) const {
        if (!policy_.enabled) return 0;
        const Cycle w = policy_.per_line_refresh_cycles;
        std::uint64_t n = 0;
        for (std::uint64_t k = 0; k < lines_; ++k) {
            const Cycle first_end = window_offset(k) + w;
            if (elapsed >= first_end) n += (elapsed - first_end) / period_cycles_ + 1;
        }
        return n;
    }

    // Completed refreshes times the array write energy.
    Energy refresh_energy(Cycle elapsed, Energy write_energy) const {
        return write_energy * completed_refreshes(elapsed);
    }

    // Fraction of time a given access collides with some refresh window.
    double duty_cycle() const {
        if (!policy_.enabled) return 0.0;
        const double busy = static_cast<double>(lines_) * static_cast<double>(policy_.per_line_refresh_cycles) /
                            static_cast<double>(period_cycles_);
        return policy_.scope == RefreshScope::WholeArray ? busy : busy / banks_;
    }

private:
    std::uint32_t bank_of(std::uint64_t line_index) const {
        return static_cast<std::uint32_t>((line_index / assoc_) % banks_);
    }
    void require_enabled() const {
        if (!policy_.enabled) throw ConfigError("refresh is disabled for this array");
    }

    RefreshPolicy policy_;
    std::uint64_t lines_;
    std::uint32_t assoc_;
    std::uint32_t banks_;
    Cycle period_cycles_ = 0;
};

} // namespace rrap
