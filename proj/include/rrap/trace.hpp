#pragma once

// Memory-reference trace: one event per line,
//
//   <cycle> <core> <R|W|N> <hex-address|count>
//
// '#' starts a comment. NonMem ('N') events carry a decimal instruction count
// instead of an address. Files ending in ".gz" are read and written through zlib.

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rrap/error.hpp"
#include "rrap/units.hpp"

namespace rrap {

enum class AccessKind : std::uint8_t { Read, Write, NonMem };

struct TraceEvent {
    Cycle cycle = 0;
    std::uint32_t core = 0;
    AccessKind kind = AccessKind::Read;
    std::uint64_t address = 0;  // unused for NonMem
    std::uint64_t count = 1;    // instructions represented; 1 for memory events

    friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

inline constexpr std::string_view kTraceHeader = "# rrap-trace v1";

namespace trace_detail {

inline bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

inline std::string_view next_token(std::string_view& s) {
    std::size_t i = 0;
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    std::string_view tok = s.substr(i, j - i);
    s.remove_prefix(j);
    return tok;
}

template <typename T>
bool to_uint(std::string_view tok, T& out, int base = 10) {
    if (tok.empty()) return false;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out, base);
    return ec == std::errc() && p == tok.data() + tok.size();
}

inline TraceEvent parse_line(std::string_view line, std::size_t lineno) {
    TraceEvent ev;
    std::string_view rest = line;
    const auto t_cycle = next_token(rest);
    const auto t_core = next_token(rest);
    const auto t_kind = next_token(rest);
    const auto t_arg = next_token(rest);
    if (!next_token(rest).empty()) throw ParseError("trailing fields", lineno);
    if (t_arg.empty()) throw ParseError("expected '<cycle> <core> <R|W|N> <address|count>'", lineno);
    if (!to_uint(t_cycle, ev.cycle)) throw ParseError("bad cycle '" + std::string(t_cycle) + "'", lineno);
    if (!to_uint(t_core, ev.core)) throw ParseError("bad core id '" + std::string(t_core) + "'", lineno);
    if (t_kind == "R" || t_kind == "W") {
        ev.kind = t_kind == "R" ? AccessKind::Read : AccessKind::Write;
        std::string_view hex = t_arg;
        if (hex.size() > 2 && hex[0] == '0' && (hex[1] == 'x' || hex[1] == 'X')) hex.remove_prefix(2);
        if (!to_uint(hex, ev.address, 16)) throw ParseError("bad address '" + std::string(t_arg) + "'", lineno);
        ev.count = 1;
    } else if (t_kind == "N") {
        ev.kind = AccessKind::NonMem;
        if (!to_uint(t_arg, ev.count) || ev.count == 0)
            throw ParseError("bad instruction count '" + std::string(t_arg) + "'", lineno);
    } else {
        throw ParseError("unknown event kind '" + std::string(t_kind) + "'", lineno);
    }
    return ev;
}

inline std::string read_file(const std::string& path) {
    if (ends_with(path, ".gz")) {
        gzFile f = gzopen(path.c_str(), "rb");
        if (!f) throw std::runtime_error("cannot open trace '" + path + "'");
        std::string out;
        char buf[1 << 16];
        int n;
        while ((n = gzread(f, buf, sizeof buf)) > 0) out.append(buf, static_cast<std::size_t>(n));
        const bool bad = n < 0;
        gzclose(f);
        if (bad) throw std::runtime_error("corrupt gzip trace '" + path + "'");
        return out;
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open trace '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, std::string_view data) {
    if (ends_with(path, ".gz")) {
        // Fixed header fields (no name/mtime) keep output byte-identical across runs.
        gzFile f = gzopen(path.c_str(), "wb9");
        if (!f) throw std::runtime_error("cannot write '" + path + "'");
        const bool ok = data.empty() ||
                        gzwrite(f, data.data(), static_cast<unsigned>(data.size())) == static_cast<int>(data.size());
        if (gzclose(f) != Z_OK || !ok) throw std::runtime_error("error writing '" + path + "'");
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw std::runtime_error("error writing '" + path + "'");
}

} // namespace trace_detail

// Parses trace text. Events keep file order; cycles must not decrease within a core.
inline std::vector<TraceEvent> parse_trace(std::string_view text) {
    std::vector<TraceEvent> events;
    std::unordered_map<std::uint32_t, Cycle> last_cycle;
    std::size_t lineno = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = units::detail::trim(line);
        if (line.empty()) continue;
        TraceEvent ev = trace_detail::parse_line(line, lineno);
        auto [it, fresh] = last_cycle.try_emplace(ev.core, ev.cycle);
        if (!fresh) {
            if (ev.cycle < it->second)
                throw ValidationError("cycle " + std::to_string(ev.cycle) + " regresses below " +
                                          std::to_string(it->second) + " on core " + std::to_string(ev.core),
                                      lineno);
            it->second = ev.cycle;
        }
        events.push_back(ev);
    }
    return events;
}

inline std::vector<TraceEvent> parse_trace(std::istream& in) {
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_trace(std::string_view(ss.str()));
}

inline std::vector<TraceEvent> read_trace_file(const std::string& path) {
    return parse_trace(std::string_view(trace_detail::read_file(path)));
}

inline void append_event(std::string& out, const TraceEvent& ev) {
    char buf[24];
    auto num = [&](std::uint64_t v, int base) { out.append(buf, std::to_chars(buf, buf + sizeof buf, v, base).ptr); };
    num(ev.cycle, 10);
    out += ' ';
    num(ev.core, 10);
    switch (ev.kind) {
    case AccessKind::Read: out += " R "; break;
    case AccessKind::Write: out += " W "; break;
    case AccessKind::NonMem: out += " N "; break;
    }
    if (ev.kind == AccessKind::NonMem) {
        num(ev.count, 10);
    } else {
        out += "0x";
        num(ev.address, 16);
    }
    out += '\n';
}

// Canonical rendering: header line, then one event per line.
inline std::string emit_trace(const std::vector<TraceEvent>& events) {
    std::string out;
    out.reserve(events.size() * 24 + kTraceHeader.size() + 1);
    out.append(kTraceHeader);
    out.push_back('\n');
    for (const auto& ev : events) append_event(out, ev);
    return out;
}

inline void write_trace_file(const std::string& path, const std::vector<TraceEvent>& events) {
    trace_detail::write_file(path, emit_trace(events));
}

// Global interleaving order: cycle, then core id; file order within ties.
inline void sort_for_replay(std::vector<TraceEvent>& events) {
    std::stable_sort(events.begin(), events.end(), [](const TraceEvent& a, const TraceEvent& b) {
        return a.cycle != b.cycle ? a.cycle < b.cycle : a.core < b.core;
    });
}

} // namespace rrap
