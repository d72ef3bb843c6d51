#pragma once

// SI quantities, the exact integer energy type, and unit-suffixed parsing
// ("10ms", "90uA", "0.233nJ", "512KB", "3GHz") used by config and CLI.

#include <charconv>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <utility>

#include "rrap/error.hpp"

namespace rrap {

using Cycle = std::uint64_t;

// Dynamic energy in integer femtojoules. Table-driven per-access charges are
// exact in this unit, so ledgers summed in any order agree bit-for-bit.
class Energy {
public:
    constexpr Energy() = default;
    static constexpr Energy from_fj(std::int64_t fj) { return Energy(fj); }

    constexpr std::int64_t fj() const { return fj_; }
    constexpr double nj() const { return static_cast<double>(fj_) * 1e-6; }

    constexpr Energy& operator+=(Energy o) { fj_ += o.fj_; return *this; }
    friend constexpr Energy operator+(Energy a, Energy b) { return Energy(a.fj_ + b.fj_); }
    friend constexpr Energy operator*(Energy a, std::uint64_t n) {
        return Energy(a.fj_ * static_cast<std::int64_t>(n));
    }
    friend constexpr auto operator<=>(Energy, Energy) = default;

private:
    constexpr explicit Energy(std::int64_t fj) : fj_(fj) {}
    std::int64_t fj_ = 0;
};

namespace units {

inline constexpr double kSecondsPerYear = 365.25 * 86400.0;

// Latency in seconds to whole cycles, rounded up. A tiny slack absorbs
// representation error so that e.g. 1ns at 3GHz stays 3 cycles.
inline Cycle seconds_to_cycles_ceil(double seconds, double clock_hz) {
    const double c = seconds * clock_hz;
    if (!(c >= 0.0) || !std::isfinite(c)) throw ConfigError("latency must be finite and non-negative");
    return static_cast<Cycle>(std::ceil(c - 1e-9));
}

inline Cycle seconds_to_cycles_floor(double seconds, double clock_hz) {
    return static_cast<Cycle>(std::floor(seconds * clock_hz + 1e-9));
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

// Splits "12.5ms" into ("12.5", "ms").
inline std::pair<std::string_view, std::string_view> split_number(std::string_view s) {
    s = trim(s);
    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        const bool numeric = (c >= '0' && c <= '9') || c == '.' || c == '-' || c == '+' ||
                             ((c == 'e' || c == 'E') && i + 1 < s.size() &&
                              (std::isdigit(static_cast<unsigned char>(s[i + 1])) || s[i + 1] == '-' ||
                               s[i + 1] == '+'));
        if (!numeric) break;
        ++i;
    }
    return {s.substr(0, i), trim(s.substr(i))};
}

inline double to_double(std::string_view num, std::string_view whole) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
    if (num.empty() || ec != std::errc() || p != num.data() + num.size())
        throw ConfigError("malformed number in '" + std::string(whole) + "'");
    return v;
}

struct Suffix {
    std::string_view name;
    double scale;
};

template <std::size_t N>
double parse_with(std::string_view text, const Suffix (&table)[N], std::string_view what,
                  bool allow_bare) {
    auto [num, suf] = split_number(text);
    const double v = to_double(num, text);
    if (suf.empty()) {
        if (allow_bare) return v;
        throw ConfigError("missing " + std::string(what) + " unit in '" + std::string(text) + "'");
    }
    for (const auto& s : table)
        if (s.name == suf) return v * s.scale;
    throw ConfigError("unknown " + std::string(what) + " unit '" + std::string(suf) + "' in '" +
                      std::string(text) + "'");
}

} // namespace detail

// Time in seconds. Accepts s, ms, us, ns, ps, min, h, d, y (365.25 days).
inline double parse_seconds(std::string_view text) {
    static constexpr detail::Suffix t[] = {{"s", 1.0},      {"ms", 1e-3},     {"us", 1e-6},
                                           {"ns", 1e-9},    {"ps", 1e-12},    {"min", 60.0},
                                           {"h", 3600.0},   {"d", 86400.0},   {"y", kSecondsPerYear},
                                           {"years", kSecondsPerYear}};
    return detail::parse_with(text, t, "time", false);
}

inline double parse_amperes(std::string_view text) {
    static constexpr detail::Suffix t[] = {{"A", 1.0}, {"mA", 1e-3}, {"uA", 1e-6}, {"nA", 1e-9}};
    return detail::parse_with(text, t, "current", false);
}

inline double parse_hertz(std::string_view text) {
    static constexpr detail::Suffix t[] = {{"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}};
    return detail::parse_with(text, t, "frequency", false);
}

inline double parse_milliwatts(std::string_view text) {
    static constexpr detail::Suffix t[] = {{"W", 1e3}, {"mW", 1.0}, {"uW", 1e-3}};
    return detail::parse_with(text, t, "power", false);
}

// Sizes use binary multiples (KB = 1024 B).
inline std::uint64_t parse_bytes(std::string_view text) {
    static constexpr detail::Suffix t[] = {{"B", 1.0},
                                           {"KB", 1024.0},
                                           {"MB", 1024.0 * 1024.0},
                                           {"GB", 1024.0 * 1024.0 * 1024.0}};
    const double v = detail::parse_with(text, t, "size", true);
    if (v < 0 || v != std::floor(v)) throw ConfigError("size must be a whole number of bytes: '" + std::string(text) + "'");
    return static_cast<std::uint64_t>(v);
}

// Whole cycles, bare or with a "cycles" suffix.
inline Cycle parse_cycles(std::string_view text) {
    static constexpr detail::Suffix t[] = {{"cycles", 1.0}, {"cycle", 1.0}};
    const double v = detail::parse_with(text, t, "cycle", true);
    if (v < 0 || v != std::floor(v)) throw ConfigError("cycle count must be a non-negative integer: '" + std::string(text) + "'");
    return static_cast<Cycle>(v);
}

// Exact decimal energy to femtojoules: "0.233nJ" -> 233000 fJ. Digits beyond
// femtojoule resolution are rounded half-up.
inline Energy parse_energy(std::string_view text) {
    auto [num, suf] = detail::split_number(text);
    int exp10;  // femtojoules per unit, as a power of ten
    if (suf == "J") exp10 = 15;
    else if (suf == "mJ") exp10 = 12;
    else if (suf == "uJ") exp10 = 9;
    else if (suf == "nJ") exp10 = 6;
    else if (suf == "pJ") exp10 = 3;
    else if (suf == "fJ") exp10 = 0;
    else throw ConfigError("unknown energy unit in '" + std::string(text) + "'");

    bool neg = false;
    if (!num.empty() && (num.front() == '-' || num.front() == '+')) {
        neg = num.front() == '-';
        num.remove_prefix(1);
    }
    const auto dot = num.find('.');
    std::string_view ip = num.substr(0, dot);
    std::string_view fp = dot == std::string_view::npos ? std::string_view{} : num.substr(dot + 1);
    if (ip.empty() && fp.empty()) throw ConfigError("malformed energy '" + std::string(text) + "'");
    std::int64_t value = 0;
    auto push = [&](char c) {
        if (c < '0' || c > '9') throw ConfigError("malformed energy '" + std::string(text) + "'");
        value = value * 10 + (c - '0');
    };
    for (char c : ip) push(c);
    int frac_used = 0;
    bool round_up = false;
    for (std::size_t i = 0; i < fp.size(); ++i) {
        if (frac_used < exp10) {
            push(fp[i]);
            ++frac_used;
        } else {
            if (fp[i] < '0' || fp[i] > '9') throw ConfigError("malformed energy '" + std::string(text) + "'");
            if (i == static_cast<std::size_t>(exp10)) round_up = fp[i] >= '5';
        }
    }
    for (; frac_used < exp10; ++frac_used) value *= 10;
    if (round_up) ++value;
    return Energy::from_fj(neg ? -value : value);
}

// Exact nJ rendering of an integer fJ value, e.g. 233000 -> "0.233000".
inline std::string format_nj(Energy e) {
    const std::int64_t fj = e.fj();
    const bool neg = fj < 0;
    const std::uint64_t a = neg ? static_cast<std::uint64_t>(-fj) : static_cast<std::uint64_t>(fj);
    std::string frac = std::to_string(a % 1000000);
    frac.insert(0, 6 - frac.size(), '0');
    return (neg ? "-" : "") + std::to_string(a / 1000000) + "." + frac;
}

// Shortest round-trip representation of a double.
inline std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc() ? std::string(buf, p) : std::string("nan");
}

inline double parse_double(std::string_view s) {
    s = detail::trim(s);
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || p != s.data() + s.size())
        throw ParseError("malformed number '" + std::string(s) + "'");
    return v;
}

inline std::uint64_t parse_u64(std::string_view s) {
    s = detail::trim(s);
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || p != s.data() + s.size())
        throw ParseError("malformed unsigned integer '" + std::string(s) + "'");
    return v;
}

inline bool is_power_of_two(std::uint64_t v) { return v && !(v & (v - 1)); }

} // namespace units
} // namespace rrap
