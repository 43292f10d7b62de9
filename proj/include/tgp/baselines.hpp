#pragma once

#include <algorithm>
#include <cstdint>
#include <queue>
#include <string>
#include <tuple>
#include <unordered_set>
#include <vector>

#include "tgp/error.hpp"
#include "tgp/graph.hpp"
#include "tgp/kde.hpp"
#include "tgp/rng.hpp"
#include "tgp/sampler.hpp"
#include "tgp/sparsify.hpp"

namespace tgp {

enum class BaselineMode { Add, Rem };

inline std::string_view to_string(BaselineMode m) { return m == BaselineMode::Add ? "ADD" : "REM"; }

namespace detail {

/// Pair scores on the plain graph of every visible edge.
class StaticPairScorer {
public:
    StaticPairScorer(const TemporalGraph& graph, Heuristic h, const SparsifyOptions& opt)
        : h_(h), nb_(graph.node_space()) {
        if (h == Heuristic::Jaccard && graph.bipartite())
            throw InputError("Jaccard baseline is only defined on unipartite graphs");
        for (const auto& e : graph.edges()) nb_.add(e.source, e.target);
        if (h == Heuristic::PageRank)
            pagerank_inplace(nb_, pr_, opt.pagerank_damping, opt.pagerank_iterations, opt.pagerank_tolerance);
    }

    double score(NodeId u, NodeId v) const {
        const double du = static_cast<double>(nb_.degree(u));
        const double dv = static_cast<double>(nb_.degree(v));
        switch (h_) {
        case Heuristic::Degree: return du + dv;
        case Heuristic::Preference: return du * dv;
        case Heuristic::Jaccard: {
            const double c = static_cast<double>(nb_.common(u, v));
            const double uni = du + dv - c;
            return uni > 0.0 ? c / uni : 0.0;
        }
        case Heuristic::PageRank: return pr_[u] + pr_[v];
        case Heuristic::Random: return 0.0;
        }
        return 0.0;
    }

    bool linked(NodeId u, NodeId v) const { return nb_.linked(u, v); }
    const IncrementalNeighbors& neighbors() const { return nb_; }

private:
    Heuristic h_;
    IncrementalNeighbors nb_;
    std::vector<double> pr_;
};

} // namespace detail

/// REM baseline: removes the Delta visible edges with the lowest pair score
/// (Random: a uniform sample without replacement). Equal scores keep stream order.
inline RemovalPlan rem_baseline(const TemporalGraph& train, Heuristic h, double p, double knowledge = 1.0,
                                std::uint64_t seed = 0, const SparsifyOptions& opt = {}) {
    if (!(knowledge > 0.0 && knowledge <= 1.0)) throw InputError("knowledge level must lie in (0, 1]");
    RemovalPlan plan;
    plan.strategy = SparsifyStrategy::edge(h, seed);
    plan.knowledge = knowledge;
    plan.visible = floor_fraction(knowledge, train.edge_count());
    plan.budget = compute_budget(opt.budget_basis == BudgetBasis::Train ? train.edge_count() : plan.visible, p);
    const auto take = std::min(plan.budget, plan.visible);
    const auto visible = train.prefix(plan.visible);

    std::vector<ScoredEdge> order(plan.visible);
    if (h == Heuristic::Random) {
        Rng rng(seed);
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = {i, 0.0};
        for (std::size_t i = 0; i < take; ++i) std::swap(order[i], order[i + rng.index(order.size() - i)]);
    } else {
        const detail::StaticPairScorer scorer(visible, h, opt);
        for (std::size_t i = 0; i < order.size(); ++i)
            order[i] = {i, scorer.score(visible.edge(i).source, visible.edge(i).target)};
        std::stable_sort(order.begin(), order.end(), [](const ScoredEdge& a, const ScoredEdge& b) { return a.score < b.score; });
    }
    for (std::size_t r = 0; r < take; ++r) plan.removed.push_back({order[r].index, order[r].score, r});
    if (plan.budget > plan.visible)
        throw BudgetExceeded("budget " + std::to_string(plan.budget) + " exceeds the " + std::to_string(plan.visible) +
                                 " visible edges",
                             std::move(plan));
    return plan;
}

/// ADD baseline: inserts the Delta never-linked pairs with the lowest pair
/// score (Random: uniform pairs without replacement) at KDE-drawn timestamps.
/// Unipartite pairs point from the lower to the higher id; bipartite pairs
/// from the source side to the target side.
inline InsertionPlan add_baseline(const TemporalGraph& train, Heuristic h, double p, double knowledge = 1.0,
                                  std::uint64_t seed = 0, const SparsifyOptions& opt = {}) {
    if (!(knowledge > 0.0 && knowledge <= 1.0)) throw InputError("knowledge level must lie in (0, 1]");
    const auto visible_count = floor_fraction(knowledge, train.edge_count());
    const auto visible = train.prefix(visible_count);
    InsertionPlan plan;
    plan.budget = compute_budget(opt.budget_basis == BudgetBasis::Train ? train.edge_count() : visible_count, p);
    if (plan.budget == 0) return plan;
    if (visible.empty()) throw InputError("ADD baseline needs at least one visible edge");

    const detail::StaticPairScorer scorer(visible, h, opt);
    std::vector<NodeId> sources, targets;
    {
        std::vector<bool> seen(visible.node_space(), false);
        for (const auto& e : visible.edges()) seen[e.source] = seen[e.target] = true;
        for (NodeId v = 0; v < seen.size(); ++v) {
            if (!seen[v]) continue;
            const auto side = visible.nodes().side(v);
            if (side != Side::Target) sources.push_back(v);
            if (side != Side::Source) targets.push_back(v);
        }
    }
    const bool bip = visible.bipartite();
    const auto valid = [&](NodeId u, NodeId v) { return u != v && (bip || u < v) && !scorer.linked(u, v); };

    std::size_t linked_pairs = 0;
    for (NodeId v = 0; v < visible.node_space(); ++v) linked_pairs += scorer.neighbors().degree(v);
    linked_pairs /= 2;
    const std::size_t all_pairs = bip ? sources.size() * targets.size() : sources.size() * (sources.size() - 1) / 2;
    const std::size_t novel = all_pairs - std::min(all_pairs, linked_pairs);

    using Pick = std::tuple<double, NodeId, NodeId>;
    std::vector<Pick> picks;
    if (h == Heuristic::Random) {
        Rng rng(seed ^ 0x5bd1e995ULL);
        std::unordered_set<std::uint64_t> taken;
        const auto want = std::min(plan.budget, novel);
        while (picks.size() < want) {
            const auto u = sources[rng.index(sources.size())];
            const auto v = targets[rng.index(targets.size())];
            const auto a = bip ? u : std::min(u, v), b = bip ? v : std::max(u, v);
            if (!valid(a, b) || !taken.insert(detail::pair_key(a, b)).second) continue;
            picks.emplace_back(0.0, a, b);
        }
    } else {
        // Bounded max-heap holding the lowest-scoring pairs seen so far.
        std::priority_queue<Pick> heap;
        for (const auto u : sources)
            for (const auto v : targets) {
                if (!valid(u, v)) continue;
                Pick cand{scorer.score(u, v), u, v};
                if (heap.size() < plan.budget) heap.push(cand);
                else if (cand < heap.top()) {
                    heap.pop();
                    heap.push(cand);
                }
            }
        while (!heap.empty()) {
            picks.push_back(heap.top());
            heap.pop();
        }
        std::reverse(picks.begin(), picks.end());
    }

    Rng rng(seed);
    const auto times = fit_kde(visible.timestamps()).draw(rng, picks.size());
    plan.rounds.push_back({0, picks.size(), 0, false});
    for (std::size_t i = 0; i < picks.size(); ++i) {
        plan.inserted.push_back({std::get<1>(picks[i]), std::get<2>(picks[i]), times[i], kNoRemoval, 0, false});
        ++plan.rounds.back().inserted;
    }
    if (plan.inserted.size() < plan.budget) {
        auto diagnosis = std::string("novelty: only ") + std::to_string(novel) + " never-linked pairs exist";
        throw InfeasibleSampling(std::move(plan), std::move(diagnosis));
    }
    return plan;
}

/// Comparison stub: replaces each removal with a uniformly random novel pair at
/// a KDE timestamp, ignoring activity windows and degrees.
inline InsertionPlan uniform_negatives(const TemporalGraph& train, const RemovalPlan& removal, std::uint64_t seed) {
    const auto visible = train.prefix(removal.visible);
    InsertionPlan plan;
    plan.budget = removal.removed.size();
    if (plan.budget == 0) return plan;
    Rng rng(seed);
    std::unordered_set<std::uint64_t> partners;
    for (const auto& e : visible.edges()) partners.insert(detail::pair_key(e.source, e.target));
    std::vector<NodeId> sources, targets;
    for (NodeId v = 0; v < visible.node_space(); ++v) {
        const auto side = visible.nodes().side(v);
        if (side != Side::Target) sources.push_back(v);
        if (side != Side::Source) targets.push_back(v);
    }
    const auto kde = fit_kde(visible.timestamps());
    plan.rounds.push_back({0, plan.budget, 0, false});
    std::size_t tries = 0;
    while (plan.inserted.size() < plan.budget) {
        if (++tries > 1000 * plan.budget) throw InfeasibleSampling(std::move(plan), "novelty");
        const auto u = sources[rng.index(sources.size())];
        const auto v = targets[rng.index(targets.size())];
        if (u == v || !partners.insert(detail::pair_key(u, v)).second) continue;
        plan.inserted.push_back({u, v, kde.draw(rng), removal.removed[plan.inserted.size()].rank, 0, false});
        ++plan.rounds.back().inserted;
    }
    return plan;
}

} // namespace tgp
