#include <gtest/gtest.h>

#include <random>

#include "common.hpp"

using namespace rrap;

namespace {

RefreshPolicy policy(double period, Cycle w, RefreshScope scope = RefreshScope::LineBank) {
    return {true, period, w, scope};
}

// Brute force: scan every window of every line.
Cycle brute_stall(std::uint64_t lines, std::uint32_t assoc, std::uint32_t banks, Cycle period, Cycle w,
                  RefreshScope scope, Cycle t, std::uint64_t idx) {
    Cycle best = 0;
    for (std::uint64_t k = 0; k < lines; ++k) {
        if (scope == RefreshScope::LineBank && (k / assoc) % banks != (idx / assoc) % banks) continue;
        const Cycle off = k * period / lines;
        for (Cycle base = 0; base <= t + period; base += period) {
            const Cycle s = base + off, e = s + w;
            if (s <= t && t < e) best = std::max(best, e - t);
        }
    }
    return best;
}

} // namespace

TEST(Refresh, ExhaustiveWindowWalk) {
    for (auto scope : {RefreshScope::LineBank, RefreshScope::WholeArray}) {
        const std::uint64_t lines = 12;
        RefreshSchedule s(policy(0.06, 3, scope), lines, 2, 2, 1e3);
        ASSERT_EQ(s.period_cycles(), 60u);
        for (Cycle t = 0; t < 180; ++t)
            for (std::uint64_t idx = 0; idx < lines; ++idx)
                ASSERT_EQ(s.conflict_stall(t, idx), brute_stall(lines, 2, 2, 60, 3, scope, t, idx))
                    << "t=" << t << " idx=" << idx;
    }
}

TEST(Refresh, UnevenPeriodSplit) {
    const std::uint64_t lines = 7;
    RefreshSchedule s(policy(0.05, 2), lines, 1, 1, 1e3);
    for (Cycle t = 0; t < 150; ++t)
        for (std::uint64_t idx = 0; idx < lines; ++idx)
            ASSERT_EQ(s.conflict_stall(t, idx), brute_stall(lines, 1, 1, 50, 2, RefreshScope::LineBank, t, idx));
}

TEST(Refresh, NextWindow) {
    RefreshSchedule s(policy(0.06, 3), 12, 1, 1, 1e3);
    EXPECT_EQ(s.next_refresh_window(2, 0), (std::pair<Cycle, Cycle>{10, 13}));
    EXPECT_EQ(s.next_refresh_window(2, 11), (std::pair<Cycle, Cycle>{10, 13}));
    EXPECT_EQ(s.next_refresh_window(2, 13), (std::pair<Cycle, Cycle>{70, 73}));
    EXPECT_EQ(s.next_refresh_window(2, 200), (std::pair<Cycle, Cycle>{250, 253}));
}

TEST(Refresh, CompletedCountMatchesEnumeration) {
    RefreshSchedule s(policy(0.06, 3), 12, 1, 1, 1e3);
    for (Cycle end : {0u, 2u, 3u, 59u, 60u, 61u, 119u, 1000u}) {
        std::uint64_t n = 0;
        for (std::uint64_t k = 0; k < 12; ++k)
            for (Cycle base = 0; base + k * 5 + 3 <= end; base += 60) ++n;
        EXPECT_EQ(s.completed_refreshes(end), n) << end;
    }
}

TEST(Refresh, MonteCarloDutyCycle) {
    for (auto scope : {RefreshScope::LineBank, RefreshScope::WholeArray}) {
        RefreshSchedule s(policy(1e-3, 7, scope), 8192, 8, 4, 3e9);
        std::mt19937_64 g(7);
        const int n = 200000;
        int hits = 0;
        for (int i = 0; i < n; ++i) hits += s.conflict_stall(g() % 30'000'000, g() % 8192) > 0;
        const double measured = static_cast<double>(hits) / n;
        EXPECT_NEAR(measured, s.duty_cycle(), 0.1 * s.duty_cycle() + 0.002) << to_string(scope);
    }
}

TEST(Refresh, RejectsPeriodLongerThanRetention) {
    EXPECT_THROW(RefreshSchedule(policy(20e-3, 7), 8192, 8, 1, 3e9, 10e-3), ConfigError);
    EXPECT_NO_THROW(RefreshSchedule(policy(10e-3, 7), 8192, 8, 1, 3e9, 10e-3));
}

TEST(Refresh, RejectsWalkLongerThanPeriod) {
    // 96MB eDRAM at 40us: 1.5M lines x 8 cycles > 120000 cycles.
    EXPECT_THROW(RefreshSchedule(policy(40e-6, 8), (96ull << 20) / 64, 16, 16, 3e9), ConfigError);
}

TEST(Refresh, DisabledIsFree) {
    RefreshSchedule s(RefreshPolicy{}, 8192, 8, 1, 3e9);
    EXPECT_EQ(s.conflict_stall(123, 4), 0u);
    EXPECT_EQ(s.completed_refreshes(1'000'000'000), 0u);
    EXPECT_EQ(s.duty_cycle(), 0.0);
    EXPECT_THROW(s.next_refresh_window(0, 0), ConfigError);
}

namespace {

struct IdleResult {
    std::uint64_t refreshes;
    std::uint64_t lines;
    Cycle period;
    Energy refresh_energy;
    double l2_total_nj;
};

IdleResult idle(const std::string& name, Cycle end) {
    Hierarchy h(builtin_config(name), 1);
    h.finish_at(end);
    const auto& l = h.lrsc(0);
    const auto r = h.report();
    return {l.stats().refreshes, l.geometry().lines(),
            h.l2_refresh(0) ? h.l2_refresh(0)->period_cycles() : 0, l.energy().category(EnergyCategory::Refresh),
            r.l2_total_nj()};
}

} // namespace

TEST(Refresh, IdleWindowCountsPerDesign) {
    const Cycle end = units::seconds_to_cycles_floor(0.1, 3e9);
    for (const char* name : {"rrap-design3", "rrap"}) {
        const auto r = idle(name, end);
        ASSERT_GT(r.period, 0u) << name;
        const std::uint64_t expected = r.lines * (end / r.period);
        EXPECT_LE(r.refreshes > expected ? r.refreshes - expected : expected - r.refreshes, r.lines) << name;
    }
    EXPECT_EQ(idle("rrap-design1", end).refreshes, 0u);
}

TEST(Refresh, DesignEnergyRatio) {
    const Cycle end = units::seconds_to_cycles_floor(0.1, 3e9);
    const auto d3 = idle("rrap-design3", end), d2 = idle("rrap", end), d1 = idle("rrap-design1", end);
    const double ratio = static_cast<double>(d3.refresh_energy.fj()) / static_cast<double>(d2.refresh_energy.fj());
    EXPECT_NEAR(ratio, 10.0, 0.2);
    EXPECT_EQ(d1.refresh_energy.fj(), 0);
    EXPECT_GT(d3.l2_total_nj, d2.l2_total_nj);
    EXPECT_GT(d2.l2_total_nj, d1.l2_total_nj);
}

TEST(Refresh, EdramL2RefreshedEvery40us) {
    const auto c = builtin_config("edram-baseline");
    ASSERT_TRUE(c.l2_refresh.enabled);
    EXPECT_DOUBLE_EQ(c.l2_refresh.period, 40e-6);
    EXPECT_FALSE(builtin_config("sram-baseline").l2_refresh.enabled);
    EXPECT_FALSE(builtin_config("sttram-baseline").l2_refresh.enabled);
    EXPECT_FALSE(builtin_config("rrap-design1").l2_refresh.enabled);
    EXPECT_TRUE(builtin_config("rrap").l2_refresh.enabled);
}
