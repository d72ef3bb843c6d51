#pragma once

#include <array>
#include <cstddef>
#include <string_view>

#include "rrap/units.hpp"

namespace rrap {

enum class EnergyCategory : std::size_t { Read, Write, TagProbe, Refresh, Writeback };
inline constexpr std::size_t kEnergyCategories = 5;
inline constexpr std::array<std::string_view, kEnergyCategories> kEnergyCategoryNames = {
    "read", "write", "tag_probe", "refresh", "writeback"};

// Dynamic energy by category plus leakage. The running total is maintained
// separately from the categories so the two can be cross-checked.
struct EnergyLedger {
    std::array<Energy, kEnergyCategories> dynamic{};
    Energy running_total{};
    double leakage_nj = 0.0;

    void charge(EnergyCategory c, Energy e) {
        dynamic[static_cast<std::size_t>(c)] += e;
        running_total += e;
    }

    Energy category(EnergyCategory c) const { return dynamic[static_cast<std::size_t>(c)]; }

    Energy category_sum() const {
        Energy s;
        for (Energy e : dynamic) s += e;
        return s;
    }

    double dynamic_nj() const { return category_sum().nj(); }
    double total_nj() const { return dynamic_nj() + leakage_nj; }

    EnergyLedger& operator+=(const EnergyLedger& o) {
        for (std::size_t i = 0; i < kEnergyCategories; ++i) dynamic[i] += o.dynamic[i];
        running_total += o.running_total;
        leakage_nj += o.leakage_nj;
        return *this;
    }

    friend bool operator==(const EnergyLedger&, const EnergyLedger&) = default;
};

// Leakage energy in nJ: mW * seconds = mJ = 1e6 nJ.
inline double leakage(Cycle elapsed_cycles, double clock_hz, double leakage_mw) {
    if (clock_hz <= 0.0) throw ConfigError("clock must be positive");
    if (leakage_mw < 0.0) throw ConfigError("leakage power must be non-negative");
    return leakage_mw * (static_cast<double>(elapsed_cycles) / clock_hz) * 1e6;
}

} // namespace rrap
