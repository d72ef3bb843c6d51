#include <gtest/gtest.h>

#include <random>

#include "common.hpp"

using namespace rrap;
using namespace rrap::dsi;

namespace {

// Every (write, later read) pair with no write or eviction in between.
// The first event opens the block whatever its kind.
Cycle brute_dsi(const BlockHistory& h) {
    Cycle best = 0;
    const auto& e = h.events;
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (!(i == 0 || e[i].kind == EventKind::Write)) continue;
        for (std::size_t j = i + 1; j < e.size(); ++j) {
            if (e[j].kind != EventKind::Read) break;
            best = std::max(best, e[j].cycle - e[i].cycle);
        }
    }
    return best;
}

BlockHistory random_history(std::mt19937_64& g, std::uint64_t addr) {
    BlockHistory h;
    h.address = addr;
    const int n = 1 + static_cast<int>(g() % 30);
    Cycle t = g() % 100;
    for (int i = 0; i < n; ++i) {
        t += g() % 1000;
        const auto k = g() % 3 == 0 ? EventKind::Write : EventKind::Read;
        h.events.push_back({t, k});
    }
    if (g() % 2) h.events.push_back({t + g() % 50, EventKind::Evict});
    return h;
}

} // namespace

TEST(Dsi, MatchesBruteForceOracle) {
    std::mt19937_64 g(2024);
    for (int i = 0; i < 1000; ++i) {
        const auto h = random_history(g, 64u * i);
        ASSERT_EQ(compute_dsi(h).dsi, brute_dsi(h)) << "history " << i;
    }
}

TEST(Dsi, FinalSegmentWinsWhenLongest) {
    // Interval A: write then two reads. Interval B: write immediately
    // overwritten. Interval C: write then three reads, spanning longest.
    BlockHistory h{0x1000,
                   {{0, EventKind::Write},
                    {4, EventKind::Read},
                    {8, EventKind::Read},
                    {10, EventKind::Write},
                    {14, EventKind::Write},
                    {20, EventKind::Read},
                    {35, EventKind::Read},
                    {50, EventKind::Read},
                    {60, EventKind::Evict}}};
    const auto r = compute_dsi(h);
    EXPECT_EQ(r.dsi, 36u);
    EXPECT_EQ(r.start, 14u);
    EXPECT_EQ(r.end, 50u);
}

TEST(Dsi, TrailingIdleTimeDoesNotCount) {
    BlockHistory h{0, {{0, EventKind::Write}, {5, EventKind::Read}, {1000, EventKind::Evict}}};
    EXPECT_EQ(compute_dsi(h).dsi, 5u);
}

TEST(Dsi, RejectsMalformedHistories) {
    EXPECT_THROW(compute_dsi(BlockHistory{}), std::invalid_argument);
    BlockHistory back{0, {{5, EventKind::Write}, {4, EventKind::Read}}};
    EXPECT_THROW(compute_dsi(back), std::invalid_argument);
    BlockHistory after{0, {{0, EventKind::Write}, {1, EventKind::Evict}, {2, EventKind::Read}}};
    EXPECT_THROW(compute_dsi(after), std::invalid_argument);
}

TEST(Dsi, BucketsUseHalfOpenBounds) {
    const Bounds b;
    const double f = 3e9;
    EXPECT_EQ(bucket_of(0, b, f), 0u);
    EXPECT_EQ(bucket_of(units::seconds_to_cycles_floor(2.4e-3, f) - 1, b, f), 0u);
    EXPECT_EQ(bucket_of(units::seconds_to_cycles_floor(2.4e-3, f), b, f), 1u);
    EXPECT_EQ(bucket_of(units::seconds_to_cycles_floor(10e-3, f), b, f), 3u);
    EXPECT_EQ(bucket_of(units::seconds_to_cycles_floor(1.0, f), b, f), 4u);
}

TEST(Dsi, DistributionAndIdealRetention) {
    std::vector<DsiResult> rs;
    const double f = 1e3;
    for (Cycle c : {1u, 2u, 3u, 5u, 10u, 30u}) rs.push_back({0, c, 0, c});
    const auto d = dsi_distribution(std::span<const DsiResult>(rs), Bounds{}, f);
    EXPECT_EQ(d.blocks, 6u);
    EXPECT_EQ(d.counts[0], 2u);  // < 2.4ms
    EXPECT_EQ(d.counts[1], 1u);  // 3ms
    EXPECT_EQ(d.counts[2], 1u);  // 5ms
    EXPECT_EQ(d.counts[3], 1u);  // 10ms
    EXPECT_EQ(d.counts[4], 1u);  // 30ms
    EXPECT_DOUBLE_EQ(ideal_retention(std::span<const DsiResult>(rs), f), 0.030);
    Bounds bad;
    bad.seconds = {1, 1, 2, 3};
    EXPECT_THROW(dsi_distribution(std::span<const DsiResult>(rs), bad, f), std::invalid_argument);
}

TEST(Dsi, HistoriesFromTraceTreatFirstTouchAsFill) {
    using rrap::test::rd;
    using rrap::test::wr;
    const std::vector<TraceEvent> t = {rd(10, 0x40), rd(30, 0x48), wr(40, 0x40), rd(45, 0x40), wr(5, 0x80)};
    const auto hs = histories_from_trace(t);
    ASSERT_EQ(hs.size(), 2u);
    EXPECT_EQ(hs[0].address, 0x40u);
    EXPECT_EQ(compute_dsi(hs[0]).dsi, 20u);
    EXPECT_EQ(hs[1].events.size(), 1u);
    EXPECT_EQ(compute_dsi(hs[1]).dsi, 0u);
}

TEST(Dsi, ResidencyTrackerSplitsResidencies) {
    ResidencyTracker tr;
    tr.fill(0x40, 0);
    tr.read(0x40, 50);
    tr.evict(0x40, 60);
    tr.read(0x40, 70);  // not resident: ignored
    tr.fill(0x40, 100);
    tr.read(0x40, 110);
    tr.write(0x40, 120);
    tr.read(0x40, 125);
    tr.finish(500);
    ASSERT_EQ(tr.results().size(), 2u);
    EXPECT_EQ(tr.results()[0].dsi, 50u);
    EXPECT_EQ(tr.results()[1].dsi, 10u);
}

TEST(Dsi, ReuseStatsBucketsAndIrra) {
    using rrap::test::rd;
    using rrap::test::wr;
    std::vector<TraceEvent> t;
    Cycle c = 0;
    t.push_back(wr(c++, 0x000));
    for (int i = 0; i < 64; ++i) t.push_back(rd(c++, 0x000));  // IRRA
    for (int i = 0; i < 70; ++i) t.push_back(rd(c++, 0x040));  // IRRA (no write at all)
    t.push_back(wr(c++, 0x080));
    for (int i = 0; i < 64; ++i) t.push_back(rd(c++, 0x080));
    t.push_back(wr(c++, 0x080));  // written after fill: not IRRA
    t.push_back(rd(c++, 0x0c0));
    t.push_back(rd(c++, 0x100));
    t.push_back(rd(c++, 0x100));
    const auto s = reuse_stats(t);
    EXPECT_EQ(s.lines, 5u);
    EXPECT_EQ(s.line_counts[0], 1u);
    EXPECT_EQ(s.line_counts[1], 1u);
    EXPECT_EQ(s.line_counts[2], 2u);  // 64 reads is reuse 63
    EXPECT_EQ(s.line_counts[3], 1u);
    EXPECT_EQ(s.irra_lines, 2u);
    EXPECT_DOUBLE_EQ(s.exclusive_read_share, 134.0 / 201.0);
}

TEST(Dsi, ReuseBucketEdges) {
    EXPECT_EQ(reuse_bucket(0), 0u);
    EXPECT_EQ(reuse_bucket(1), 0u);
    EXPECT_EQ(reuse_bucket(2), 1u);
    EXPECT_EQ(reuse_bucket(3), 2u);
    EXPECT_EQ(reuse_bucket(64), 2u);
    EXPECT_EQ(reuse_bucket(65), 3u);
}
