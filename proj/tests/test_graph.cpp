#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "fixtures.hpp"

using namespace tgp;
using fixtures::make_stream;

TEST(TemporalGraph, ReordersByTimestamp) {
    const auto g = make_stream({{0, 1, 5.0}, {0, 2, 3.0}});
    ASSERT_EQ(g.edge_count(), 2u);
    EXPECT_EQ(g.timestamps()[0], 3.0);
    EXPECT_EQ(g.timestamps()[1], 5.0);
    EXPECT_EQ(g.nodes().original(g.edge(0).target), 2);
    EXPECT_TRUE(g.was_resorted());
}

TEST(TemporalGraph, StableForEqualTimestamps) {
    const auto g = make_stream({{0, 1, 2.0}, {3, 4, 1.0}, {5, 6, 2.0}});
    EXPECT_EQ(g.nodes().original(g.edge(1).source), 0);
    EXPECT_EQ(g.nodes().original(g.edge(2).source), 5);
}

TEST(TemporalGraph, RejectsSelfLoopsAndBadTimes) {
    EXPECT_THROW(make_stream({{1, 1, 0.0}}), InputError);
    EXPECT_THROW(make_stream({{1, 2, -1.0}}), InputError);
    EXPECT_THROW(make_stream({{1, 2, std::numeric_limits<double>::quiet_NaN()}}), InputError);
}

TEST(TemporalGraph, BipartiteIdSpacesAreSeparate) {
    const auto g = make_stream({{7, 7, 1.0}, {7, 8, 2.0}}, true);
    EXPECT_EQ(g.node_count(), 3u);
    EXPECT_NE(g.edge(0).source, g.edge(0).target);
}

TEST(ChronologicalSplit, FloorSizes) {
    std::vector<fixtures::Row> rows;
    for (int i = 0; i < 100; ++i) rows.push_back({i, i + 1, static_cast<double>(i)});
    const auto s = chronological_split(make_stream(rows));
    EXPECT_EQ(s.train.edge_count(), 70u);
    EXPECT_EQ(s.val.edge_count(), 15u);
    EXPECT_EQ(s.test.edge_count(), 15u);
    EXPECT_EQ(s.val.timestamps().front(), 70.0);
}

TEST(ChronologicalSplit, LargeTrainSize) {
    // 0.7 * 157474 in integer arithmetic.
    const std::size_t expected = 157474u * 7u / 10u;
    EXPECT_EQ(floor_fraction(0.7, 157474), expected);
    EXPECT_EQ(expected, 110231u);
}

TEST(ChronologicalSplit, SingleEdgeWarns) {
    std::vector<std::string> warnings;
    ScopedWarningSink sink([&](std::string_view m) { warnings.emplace_back(m); });
    const auto s = chronological_split(make_stream({{0, 1, 1.0}}));
    EXPECT_EQ(s.train.edge_count(), 0u);
    EXPECT_EQ(s.val.edge_count(), 0u);
    EXPECT_EQ(s.test.edge_count(), 1u);
    EXPECT_EQ(warnings.size(), 1u);
}

TEST(ChronologicalSplit, RejectsBadRatios) {
    const auto g = make_stream({{0, 1, 1.0}});
    EXPECT_THROW(chronological_split(g, {0.5, 0.5, 0.5}), InputError);
    EXPECT_THROW(chronological_split(TemporalGraph{}), InputError);
}

TEST(Aggregate, CutoffFilters) {
    const auto g = make_stream({{0, 1, 1.0}, {1, 2, 2.0}, {2, 3, 3.0}});
    const auto a = aggregate_until(g, 2.0);
    EXPECT_EQ(a.edge_count, 2u);
    EXPECT_EQ(a.out_degree[g.nodes().find(1, Side::Any).value()], 1u);
    EXPECT_EQ(a.in_degree[g.nodes().find(3, Side::Any).value()], 0u);

    EXPECT_EQ(aggregate_until(g, kInfinity).edge_count, 3u);

    const auto empty = aggregate_until(g, 0.5);
    EXPECT_EQ(empty.edge_count, 0u);
    for (const auto& adj : empty.adjacency) EXPECT_TRUE(adj.empty());
    for (auto d : empty.out_degree) EXPECT_EQ(d, 0u);
}

TEST(ActiveNodes, ClosedWindow) {
    const auto g = make_stream({{0, 1, 10.0}});
    EXPECT_EQ(active_nodes(g, 12.0, 5.0).size(), 2u);
    EXPECT_TRUE(active_nodes(g, 20.0, 5.0).empty());
    EXPECT_EQ(active_nodes(g, 10.0, 0.0001).size(), 2u);
    EXPECT_EQ(active_nodes(g, 15.0, 5.0).size(), 2u);
    EXPECT_THROW(active_nodes(g, 10.0, 0.0), InputError);

    const ActivityIndex idx(g);
    EXPECT_TRUE(idx.active(g.edge(0).source, 15.0, 5.0));
    EXPECT_FALSE(idx.active(g.edge(0).source, 15.1, 5.0));
    EXPECT_EQ(idx.last_at_or_before(g.edge(0).target, 9.0), -kInfinity);
}

TEST(DegreeLedger, Balances) {
    const auto g = make_stream({{0, 1, 1.0}, {0, 2, 2.0}});
    DegreeLedger led(g);
    const auto a = g.edge(0).source, b = g.edge(0).target, c = g.edge(1).target;
    EXPECT_EQ(led[a].original_out, 2u);
    led.record_deletion(a, b);
    led.record_insertion(a, c);
    EXPECT_EQ(led.balance_out(a), 0);
    EXPECT_EQ(led.balance_in(b), -1);
    EXPECT_EQ(led.balance_in(c), 1);
}
