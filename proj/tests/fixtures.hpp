#pragma once

// Hand-built streams shared by the unit tests and the acceptance suite.

#include <cmath>
#include <cstdint>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "tgp/tgp.hpp"

namespace fixtures {

using tgp::NodeId;
using tgp::TemporalGraph;

struct Row {
    std::int64_t source;
    std::int64_t target;
    double timestamp;
};

inline TemporalGraph make_stream(const std::vector<Row>& rows, bool bipartite = false, std::size_t features = 0) {
    auto table = std::make_shared<tgp::NodeTable>(bipartite);
    std::vector<tgp::TemporalEdge> edges;
    for (const auto& r : rows) {
        tgp::TemporalEdge e;
        e.source = table->intern(r.source, tgp::Side::Source);
        e.target = table->intern(r.target, tgp::Side::Target);
        e.timestamp = r.timestamp;
        e.features.assign(features, 0.5);
        edges.push_back(e);
    }
    return TemporalGraph(std::move(edges), std::move(table), features);
}

/// Random stream on at most `max_nodes` nodes, timestamps drawn from a small
/// integer range so that ties occur.
inline TemporalGraph random_small_stream(tgp::Rng& rng, std::size_t max_nodes, std::size_t max_edges) {
    const auto nodes = 2 + rng.index(max_nodes - 1);
    const auto m = 1 + rng.index(max_edges);
    std::vector<Row> rows;
    for (std::size_t i = 0; i < m; ++i) {
        const auto u = static_cast<std::int64_t>(rng.index(nodes));
        auto v = static_cast<std::int64_t>(rng.index(nodes - 1));
        if (v >= u) ++v;
        rows.push_back({u, v, static_cast<double>(rng.index(2 * m))});
    }
    return make_stream(rows);
}

/// Default 10,000-edge stream used for the budget and constraint checks.
inline tgp::SyntheticSpec standard_spec(bool bipartite = false) {
    tgp::SyntheticSpec s;
    s.bipartite = bipartite;
    return s;
}
inline constexpr double kStandardWindow = 100.0;

// ---------------------------------------------------------------------------
// Ring stream with a degree-preserving swap plan, for planted faults.

/// Edge s runs (s mod 40) -> (s+1 mod 40) at time s, s = 0..999. With W = 50
/// every node is active at every t >= 50.
inline TemporalGraph ring_stream() {
    std::vector<Row> rows;
    for (int s = 0; s < 1000; ++s) rows.push_back({s % 40, (s + 1) % 40, static_cast<double>(s)});
    return make_stream(rows);
}
inline constexpr double kRingWindow = 50.0;

struct Plans {
    tgp::RemovalPlan removal;
    tgp::InsertionPlan insertion;
};

/// 150 removals spread over [50, 999], replaced by swaps (a->b, c->d) =>
/// (a->d, c->b) at the removed timestamps. Every inserted pair is a non-ring
/// pair used once, so the plan satisfies C1-C4 and novelty.
inline Plans ring_swap_plan(const TemporalGraph& ring) {
    const auto& nodes = ring.nodes();
    auto id = [&](NodeId v) { return static_cast<int>(nodes.original(v)); };
    auto ring_pair = [](int x, int y) { return (x + 1) % 40 == y || (y + 1) % 40 == x; };

    std::vector<std::size_t> picks;
    for (int k = 0; k < 150; ++k) picks.push_back(50 + static_cast<std::size_t>(k) * 950 / 150);
    std::set<std::pair<int, int>> used;
    auto key = [](int x, int y) { return std::make_pair(std::min(x, y), std::max(x, y)); };

    Plans out;
    out.removal.budget = 150;
    out.removal.visible = ring.edge_count();
    std::vector<bool> paired(picks.size(), false);
    for (std::size_t i = 0; i < picks.size(); ++i) {
        if (paired[i]) continue;
        const auto& e1 = ring.edge(picks[i]);
        bool done = false;
        for (std::size_t j = i + 1; j < picks.size() && !done; ++j) {
            if (paired[j]) continue;
            const auto& e2 = ring.edge(picks[j]);
            const int a = id(e1.source), b = id(e1.target), c = id(e2.source), d = id(e2.target);
            if (a == d || c == b || ring_pair(a, d) || ring_pair(c, b)) continue;
            if (used.count(key(a, d)) || used.count(key(c, b)) || key(a, d) == key(c, b)) continue;
            used.insert(key(a, d));
            used.insert(key(c, b));
            paired[i] = paired[j] = true;
            const auto ri = out.removal.removed.size();
            out.removal.removed.push_back({picks[i], 0.0, ri});
            out.removal.removed.push_back({picks[j], 0.0, ri + 1});
            out.insertion.inserted.push_back({e1.source, e2.target, e1.timestamp, ri, 0, false});
            out.insertion.inserted.push_back({e2.source, e1.target, e2.timestamp, ri + 1, 0, false});
            done = true;
        }
        if (!done) throw tgp::Error("ring fixture could not pair removal " + std::to_string(i));
    }
    out.removal.budget = out.removal.removed.size();
    out.insertion.budget = out.insertion.inserted.size();
    return out;
}

struct AuditedRun {
    TemporalGraph poisoned;
    tgp::Manifest manifest;
    tgp::AuditReport report;
};

inline AuditedRun audit_plans(const TemporalGraph& train, const Plans& plans, std::size_t budget, double window) {
    AuditedRun r{tgp::insertion_positioning(train, plans.removal, plans.insertion),
                 tgp::make_manifest(train, &plans.removal, &plans.insertion), {}};
    tgp::AuditThresholds th;
    th.window = window;
    th.budget = budget;
    r.report = tgp::audit(train, r.poisoned, &r.manifest, th);
    return r;
}

/// The six audit flags, in a fixed order: C1, C2, C3, C4, novelty, bipartite.
inline std::vector<bool> flags(const tgp::AuditReport& r) {
    return {r.c1.pass, r.c2.pass, r.c3.pass, r.c4.pass, r.novelty.pass, r.bipartite.pass};
}
inline const char* const kFlagNames[] = {"C1", "C2", "C3", "C4", "novelty", "bipartite"};

/// Mutations of the clean ring plan, each violating one check.
inline Plans fault_c1(const TemporalGraph& ring, Plans p) {
    // One extra removal whose endpoints are otherwise untouched by the plan.
    std::set<std::size_t> taken;
    for (const auto& r : p.removal.removed) taken.insert(r.index);
    for (std::size_t i = 60; i < ring.edge_count(); ++i)
        if (!taken.count(i)) {
            p.removal.removed.push_back({i, 0.0, p.removal.removed.size()});
            break;
        }
    return p;
}

inline Plans fault_c2(Plans p) {
    for (auto& e : p.insertion.inserted) e.timestamp = 900.0 + std::fmod(e.timestamp, 100.0);
    return p;
}

inline Plans fault_c3(const TemporalGraph& ring, Plans p) {
    // At t = 5 only nodes 0..6 have been active.
    for (auto& e : p.insertion.inserted)
        if (ring.nodes().original(e.source) > 10 && ring.nodes().original(e.target) > 10) {
            e.timestamp = 5.0;
            break;
        }
    return p;
}

inline Plans fault_c4(const TemporalGraph& ring, Plans p) {
    // Retarget two insertions onto one node, so its in-degree grows by 2.
    std::set<std::pair<NodeId, NodeId>> pairs;
    for (const auto& e : p.insertion.inserted) pairs.insert({std::min(e.source, e.target), std::max(e.source, e.target)});
    const auto& nodes = ring.nodes();
    auto node = [&](int x) { return *nodes.find(x, tgp::Side::Any); };
    for (int x = 0; x < 40; ++x) {
        const auto target = node(x);
        std::vector<std::size_t> chosen;
        for (std::size_t i = 0; i < p.insertion.inserted.size() && chosen.size() < 2; ++i) {
            const auto& e = p.insertion.inserted[i];
            const int s = static_cast<int>(nodes.original(e.source));
            if (e.target == target || e.source == target) continue;
            if ((s + 1) % 40 == x || (x + 1) % 40 == s) continue;
            if (pairs.count({std::min(e.source, target), std::max(e.source, target)})) continue;
            if (!chosen.empty() && p.insertion.inserted[chosen[0]].source == e.source) continue;
            chosen.push_back(i);
        }
        if (chosen.size() == 2) {
            for (auto i : chosen) p.insertion.inserted[i].target = target;
            return p;
        }
    }
    throw tgp::Error("C4 fault could not be planted");
}

inline Plans fault_novelty(const TemporalGraph& ring, Plans p) {
    // a -> a-1 reverses the ring edge (a-1) -> a, which occurred at time a-1 < t.
    auto& e = p.insertion.inserted.front();
    const int a = static_cast<int>(ring.nodes().original(e.source));
    e.target = *ring.nodes().find((a + 39) % 40, tgp::Side::Any);
    return p;
}

/// Rewrites one inserted row of a clean bipartite run so that its item column
/// holds a user id that is active in the window. Only the partition check
/// should notice. Returns the re-parsed poisoned stream.
inline TemporalGraph bipartite_fault(const TemporalGraph& train, const tgp::AttackOutcome& run, double window) {
    const auto& nodes = train.nodes();
    const tgp::ActivityIndex activity(train);
    for (const auto& ins : run.insertion->inserted) {
        NodeId user = 0;
        bool found = false;
        for (const auto& e : train.edges())
            if (e.source != ins.source && activity.active(e.source, ins.timestamp, window)) {
                user = e.source;
                found = true;
                break;
            }
        if (!found) continue;
        std::string row = std::to_string(nodes.original(ins.source)) + "," + std::to_string(nodes.original(ins.target)) + ",";
        tgp::detail::append_double(row, ins.timestamp);
        row += ",";
        const auto text = tgp::serialize_edge_stream(*run.poisoned);
        const auto at = text.find("\n" + row);
        if (at == std::string::npos) continue;
        const auto id_begin = text.find(',', at + 1) + 1;
        const auto id_end = text.find(',', id_begin);
        const auto mutated =
            text.substr(0, id_begin) + std::to_string(nodes.original(user)) + text.substr(id_end);
        tgp::DatasetFormat fmt;
        fmt.bipartite = true;
        return tgp::parse_edge_stream(mutated, fmt);
    }
    throw tgp::Error("bipartite fault could not be planted");
}

// ---------------------------------------------------------------------------
// Prefix-stable stream for the knowledge sweep.

/// 200 star edges hub -> leaf_i at t = i (Degree score i + 2, increasing),
/// then 800 edges between fresh node pairs (score 2).
inline TemporalGraph nesting_stream() {
    std::vector<Row> rows;
    for (int i = 0; i < 200; ++i) rows.push_back({0, 1 + i, static_cast<double>(i)});
    for (int i = 0; i < 800; ++i) rows.push_back({1000 + 2 * i, 1001 + 2 * i, 200.0 + i});
    return make_stream(rows);
}

// ---------------------------------------------------------------------------
// Starvation instance for recovery liveness.

/// 1000 background edges among nodes 0..49 over [0, 10000), plus two
/// interactions a->b and c->d at t = 5000 between nodes that are active
/// nowhere else. Removing both leaves deficits that can only be met at
/// t in [5000, 5000 + W].
inline TemporalGraph starvation_stream(std::uint64_t seed = 5) {
    tgp::Rng rng(seed);
    std::vector<Row> rows;
    for (int i = 0; i < 1000; ++i) {
        const auto u = static_cast<std::int64_t>(rng.index(50));
        auto v = static_cast<std::int64_t>(rng.index(49));
        if (v >= u) ++v;
        rows.push_back({u, v, std::floor(rng.uniform() * 10000.0)});
    }
    rows.push_back({900, 901, 5000.0});
    rows.push_back({902, 903, 5000.0});
    return make_stream(rows);
}
inline constexpr double kStarvationWindow = 10.0;

inline tgp::RemovalPlan starvation_removal(const TemporalGraph& g) {
    tgp::RemovalPlan plan;
    plan.visible = g.edge_count();
    for (std::size_t i = 0; i < g.edge_count(); ++i) {
        const auto src = g.nodes().original(g.edge(i).source);
        if (src == 900 || src == 902) plan.removed.push_back({i, 1.0, plan.removed.size()});
    }
    plan.budget = plan.removed.size();
    return plan;
}

} // namespace fixtures
