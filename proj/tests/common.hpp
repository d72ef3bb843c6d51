#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rrap/rrap.hpp"

namespace rrap::test {

// Small arrays so evictions happen within a handful of accesses. Technology
// values keep their presets; only geometry shrinks.
inline HierarchyConfig tiny_config(const std::string& builtin, std::uint64_t l1_lines = 4, std::uint64_t l2_lines = 8,
                                   std::uint64_t llc_lines = 32) {
    HierarchyConfig c = builtin_config(builtin);
    auto shrink = [](ArrayConfig& a, std::uint64_t lines, std::uint32_t assoc) {
        a.geometry.capacity_bytes = lines * 64;
        a.geometry.associativity = assoc;
        a.geometry.banks = 1;
    };
    shrink(c.l1, l1_lines, 2);
    shrink(c.llc, llc_lines, 4);
    if (c.is_rrap()) {
        shrink(c.lrsc, l2_lines, 2);
        shrink(c.hrsc, l2_lines, 2);
    } else {
        shrink(c.l2, l2_lines, 2);
    }
    return c;
}

inline TraceEvent rd(Cycle t, std::uint64_t a, std::uint32_t core = 0) { return {t, core, AccessKind::Read, a, 1}; }
inline TraceEvent wr(Cycle t, std::uint64_t a, std::uint32_t core = 0) { return {t, core, AccessKind::Write, a, 1}; }
inline TraceEvent nm(Cycle t, std::uint64_t n, std::uint32_t core = 0) { return {t, core, AccessKind::NonMem, 0, n}; }

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("rrap_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

} // namespace rrap::test
