#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "tgp/drift.hpp"
#include "tgp/error.hpp"
#include "tgp/graph.hpp"
#include "tgp/rng.hpp"
#include "tgp/tpr.hpp"

namespace tgp {

enum class StrategyFamily { EdgeHeuristic, TimestampDrift, EdgeRank };
enum class Heuristic { Degree, Jaccard, PageRank, Preference, Random };
enum class EdgeRankVariant { TER, CombinedTER };

inline constexpr Heuristic kAllHeuristics[] = {Heuristic::Degree, Heuristic::Jaccard, Heuristic::PageRank,
                                               Heuristic::Preference, Heuristic::Random};

inline std::string_view to_string(Heuristic h) {
    switch (h) {
    case Heuristic::Degree: return "Degree";
    case Heuristic::Jaccard: return "Jaccard";
    case Heuristic::PageRank: return "PageRank";
    case Heuristic::Preference: return "Preference";
    case Heuristic::Random: return "Random";
    }
    return "?";
}

inline std::optional<Heuristic> heuristic_from_string(std::string_view name) {
    for (auto h : kAllHeuristics)
        if (to_string(h) == name) return h;
    return std::nullopt;
}

struct SparsifyStrategy {
    StrategyFamily family = StrategyFamily::EdgeHeuristic;
    Heuristic heuristic = Heuristic::Degree;
    DriftMetric metric{};
    EdgeRankVariant variant = EdgeRankVariant::TER;
    std::uint64_t seed = 0;

    static SparsifyStrategy edge(Heuristic h, std::uint64_t seed = 0) {
        SparsifyStrategy s;
        s.family = StrategyFamily::EdgeHeuristic;
        s.heuristic = h;
        s.seed = seed;
        return s;
    }
    static SparsifyStrategy drift(DriftMetric m) {
        SparsifyStrategy s;
        s.family = StrategyFamily::TimestampDrift;
        s.metric = m;
        return s;
    }
    static SparsifyStrategy edge_rank(EdgeRankVariant v) {
        SparsifyStrategy s;
        s.family = StrategyFamily::EdgeRank;
        s.variant = v;
        return s;
    }

    std::string name() const {
        switch (family) {
        case StrategyFamily::EdgeHeuristic: return std::string(to_string(heuristic));
        case StrategyFamily::TimestampDrift: return "TPR-" + std::string(to_string(metric.kind));
        case StrategyFamily::EdgeRank: return variant == EdgeRankVariant::TER ? "TER" : "Combined-TER";
        }
        return "?";
    }
};

/// The sixteen sparsification strategies, in catalog order.
inline std::vector<std::string> strategy_names() {
    std::vector<std::string> names;
    for (auto h : kAllHeuristics) names.emplace_back(to_string(h));
    names.emplace_back("TER");
    names.emplace_back("Combined-TER");
    for (auto k : kAllDriftKinds) names.push_back("TPR-" + std::string(to_string(k)));
    return names;
}

inline std::optional<SparsifyStrategy> strategy_from_name(std::string_view name, std::uint64_t seed = 0) {
    if (auto h = heuristic_from_string(name)) return SparsifyStrategy::edge(*h, seed);
    if (name == "TER") return SparsifyStrategy::edge_rank(EdgeRankVariant::TER);
    if (name == "Combined-TER" || name == "CombinedTER") return SparsifyStrategy::edge_rank(EdgeRankVariant::CombinedTER);
    if (name.starts_with("TPR-"))
        if (auto k = drift_kind_from_string(name.substr(4))) return SparsifyStrategy::drift(DriftMetric{*k});
    return std::nullopt;
}

enum class BudgetBasis {
    /// Delta = floor(p * |E_train|), capped at the visible prefix.
    Train,
    /// Delta = floor(p * |visible prefix|); used for knowledge sweeps.
    Visible,
};

struct SparsifyOptions {
    TprParams tpr{};
    double combined_weight = 0.5;
    /// Score TER and drift on raw snapshots instead of normalized ones.
    bool use_raw_snapshots = false;
    BudgetBasis budget_basis = BudgetBasis::Train;
    /// 0 recomputes PageRank on every distinct-timestamp aggregate. A positive
    /// value refreshes only after the aggregate grows by that fraction.
    double pagerank_refresh_fraction = 0.0;
    double pagerank_damping = 0.85;
    std::size_t pagerank_iterations = 100;
    double pagerank_tolerance = 1e-9;
};

inline std::size_t compute_budget(std::size_t edge_count, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw InputError("perturbation rate must lie in [0, 1]");
    return floor_fraction(p, edge_count);
}

struct ScoredEdge {
    std::size_t index;
    double score;
};

namespace detail {

/// Distinct undirected neighbor sets, grown one edge at a time.
class IncrementalNeighbors {
public:
    explicit IncrementalNeighbors(std::size_t n) : sets_(n), lists_(n) {}

    void add(NodeId u, NodeId v) {
        if (sets_[u].insert(v).second) {
            lists_[u].push_back(v);
            ++pair_count_;
        }
        if (sets_[v].insert(u).second) lists_[v].push_back(u);
    }

    std::size_t degree(NodeId v) const { return lists_[v].size(); }
    const std::vector<NodeId>& neighbors(NodeId v) const { return lists_[v]; }
    bool linked(NodeId u, NodeId v) const { return sets_[u].count(v) > 0; }
    std::size_t size() const { return lists_.size(); }

    std::size_t common(NodeId u, NodeId v) const {
        const auto& small = lists_[u].size() <= lists_[v].size() ? lists_[u] : lists_[v];
        const auto& big = lists_[u].size() <= lists_[v].size() ? sets_[v] : sets_[u];
        std::size_t c = 0;
        for (auto w : small) c += big.count(w);
        return c;
    }

private:
    std::vector<std::unordered_set<NodeId>> sets_;
    std::vector<std::vector<NodeId>> lists_;
    std::size_t pair_count_ = 0;
};

/// Power iteration on the undirected simple graph; dangling mass spreads uniformly.
/// `rank` is used as the starting vector and overwritten with the result.
inline void pagerank_inplace(const IncrementalNeighbors& nb, std::vector<double>& rank, double damping,
                             std::size_t iterations, double tolerance) {
    const auto n = nb.size();
    if (n == 0) return;
    const double inv_n = 1.0 / static_cast<double>(n);
    if (rank.size() != n) rank.assign(n, inv_n);
    std::vector<double> next(n);
    for (std::size_t it = 0; it < iterations; ++it) {
        double dangling = 0.0;
        for (std::size_t v = 0; v < n; ++v)
            if (nb.degree(static_cast<NodeId>(v)) == 0) dangling += rank[v];
        const double base = (1.0 - damping) * inv_n + damping * dangling * inv_n;
        std::fill(next.begin(), next.end(), base);
        for (std::size_t u = 0; u < n; ++u) {
            const auto d = nb.degree(static_cast<NodeId>(u));
            if (d == 0) continue;
            const double share = damping * rank[u] / static_cast<double>(d);
            for (auto w : nb.neighbors(static_cast<NodeId>(u))) next[w] += share;
        }
        double diff = 0.0;
        for (std::size_t v = 0; v < n; ++v) diff += std::abs(next[v] - rank[v]);
        rank.swap(next);
        if (diff < tolerance) break;
    }
}

inline void rank_descending(std::vector<ScoredEdge>& scored) {
    std::stable_sort(scored.begin(), scored.end(),
                     [](const ScoredEdge& a, const ScoredEdge& b) { return a.score > b.score; });
}

} // namespace detail

/// Static-heuristic score of every edge on the aggregate G^(j) at its own
/// timestamp (all edges with t <= t_j), in stream order.
inline std::vector<double> heuristic_scores(const TemporalGraph& graph, Heuristic h, std::uint64_t seed = 0,
                                            const SparsifyOptions& opt = {}) {
    if (h == Heuristic::Jaccard && graph.bipartite())
        throw InputError("Jaccard scoring is only defined on unipartite graphs");
    std::vector<double> scores(graph.edge_count(), 0.0);
    if (h == Heuristic::Random) {
        Rng rng(seed);
        for (auto& s : scores) s = rng.uniform();
        return scores;
    }
    detail::IncrementalNeighbors nb(graph.node_space());
    std::vector<double> pr;
    std::size_t pr_edges = 0;
    const auto groups = graph.timestamp_groups();
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto begin = groups[g].second;
        const auto end = g + 1 < groups.size() ? groups[g + 1].second : graph.edge_count();
        for (auto i = begin; i < end; ++i) nb.add(graph.edge(i).source, graph.edge(i).target);
        if (h == Heuristic::PageRank) {
            const bool stale = pr.empty() || opt.pagerank_refresh_fraction <= 0.0 ||
                               static_cast<double>(end - pr_edges) >=
                                   opt.pagerank_refresh_fraction * static_cast<double>(pr_edges);
            if (stale) {
                detail::pagerank_inplace(nb, pr, opt.pagerank_damping, opt.pagerank_iterations,
                                         opt.pagerank_tolerance);
                pr_edges = end;
            }
        }
        for (auto i = begin; i < end; ++i) {
            const auto u = graph.edge(i).source;
            const auto v = graph.edge(i).target;
            const double du = static_cast<double>(nb.degree(u));
            const double dv = static_cast<double>(nb.degree(v));
            switch (h) {
            case Heuristic::Degree: scores[i] = du + dv; break;
            case Heuristic::Preference: scores[i] = du * dv; break;
            case Heuristic::Jaccard: {
                const double c = static_cast<double>(nb.common(u, v));
                scores[i] = c / (du + dv - c);
                break;
            }
            case Heuristic::PageRank: scores[i] = pr[u] + pr[v]; break;
            case Heuristic::Random: break;
            }
        }
    }
    return scores;
}

/// Per-edge scores for the EdgeRank family: TER ranks each edge by TER at its
/// timestamp, Combined-TER by the blended per-edge contribution.
inline std::vector<double> edge_rank_scores(const TemporalGraph& graph, EdgeRankVariant variant,
                                            const SparsifyOptions& opt = {}) {
    const auto timeline = compute_tpr_stream(graph, opt.tpr, opt.use_raw_snapshots);
    if (variant == EdgeRankVariant::CombinedTER)
        return compute_combined_ter(graph, timeline, opt.combined_weight, opt.use_raw_snapshots);
    const auto ter = compute_ter(graph, timeline, opt.use_raw_snapshots);
    std::vector<double> scores(graph.edge_count());
    std::size_t g = 0;
    for (std::size_t i = 0; i < graph.edge_count(); ++i) {
        while (ter[g].timestamp != graph.edge(i).timestamp) ++g;
        scores[i] = ter[g].score;
    }
    return scores;
}

/// Edges ranked by descending score; equal scores keep stream order.
inline std::vector<ScoredEdge> score_edges(const TemporalGraph& graph, const SparsifyStrategy& strategy,
                                           const SparsifyOptions& opt = {}) {
    std::vector<double> scores;
    switch (strategy.family) {
    case StrategyFamily::EdgeHeuristic: scores = heuristic_scores(graph, strategy.heuristic, strategy.seed, opt); break;
    case StrategyFamily::EdgeRank: scores = edge_rank_scores(graph, strategy.variant, opt); break;
    case StrategyFamily::TimestampDrift:
        throw InputError("score_edges: timestamp-drift strategies rank timestamps, not edges");
    }
    std::vector<ScoredEdge> ranked(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) ranked[i] = {i, scores[i]};
    detail::rank_descending(ranked);
    return ranked;
}

struct RankedTimestamp {
    Timestamp timestamp;
    std::size_t position; ///< index in the timeline
    double delta;
};

/// Timestamps ranked by drift from the previous snapshot, largest first.
/// The first timestamp has delta 0 and sorts after every other zero; other
/// ties go to the earlier timestamp.
inline std::vector<RankedTimestamp> rank_timestamps(const TprTimeline& timeline, const DriftMetric& metric,
                                                    bool use_raw = false) {
    if (timeline.size() < 2) throw InputError("ranking timestamps needs at least two snapshots");
    const bool raw = use_raw || metric.wants_raw_snapshots();
    std::vector<RankedTimestamp> ranked(timeline.size());
    ranked[0] = {timeline.timestamps()[0], 0, 0.0};
    for (std::size_t i = 1; i < timeline.size(); ++i)
        ranked[i] = {timeline.timestamps()[i], i, drift(timeline.snapshot(i - 1, raw), timeline.snapshot(i, raw), metric)};
    std::sort(ranked.begin(), ranked.end(), [](const RankedTimestamp& a, const RankedTimestamp& b) {
        if (a.delta != b.delta) return a.delta > b.delta;
        const bool a_first = a.position == 0, b_first = b.position == 0;
        if (a_first != b_first) return b_first;
        return a.position < b.position;
    });
    return ranked;
}

struct RemovedEdge {
    std::size_t index; ///< position in the training stream
    double score;
    std::size_t rank;
};

struct RemovalPlan {
    std::vector<RemovedEdge> removed;
    std::size_t budget = 0;
    std::size_t visible = 0;
    double knowledge = 1.0;
    SparsifyStrategy strategy{};

    std::vector<std::size_t> indices() const {
        std::vector<std::size_t> idx;
        idx.reserve(removed.size());
        for (const auto& r : removed) idx.push_back(r.index);
        std::sort(idx.begin(), idx.end());
        return idx;
    }
};

/// The budget exceeds the visible prefix. Carries the plan that removes every visible edge.
class BudgetExceeded : public InputError {
public:
    BudgetExceeded(const std::string& what, RemovalPlan partial) : InputError(what), partial_(std::move(partial)) {}
    const RemovalPlan& partial() const noexcept { return partial_; }

private:
    RemovalPlan partial_;
};

/// Picks exactly Delta training edges to remove.
///
/// The attacker sees the first floor(k * |E_train|) edges and can only score
/// and remove among those. Edge families take the top-Delta ranked edges.
/// The drift family removes whole timestamps in drift order, and at the first
/// timestamp that would overshoot takes the remaining count by Combined-TER.
inline RemovalPlan select_removals(const TemporalGraph& train, const SparsifyStrategy& strategy, double p,
                                   double knowledge = 1.0, const SparsifyOptions& opt = {}) {
    if (!(knowledge > 0.0 && knowledge <= 1.0)) throw InputError("knowledge level must lie in (0, 1]");
    RemovalPlan plan;
    plan.strategy = strategy;
    plan.knowledge = knowledge;
    plan.visible = floor_fraction(knowledge, train.edge_count());
    plan.budget = compute_budget(opt.budget_basis == BudgetBasis::Train ? train.edge_count() : plan.visible, p);
    const std::size_t take = std::min(plan.budget, plan.visible);
    if (take == 0 && plan.budget == 0) return plan;

    const auto visible = train.prefix(plan.visible);

    if (strategy.family != StrategyFamily::TimestampDrift) {
        const auto ranked = score_edges(visible, strategy, opt);
        for (std::size_t r = 0; r < take; ++r) plan.removed.push_back({ranked[r].index, ranked[r].score, r});
    } else if (take > 0) {
        const bool raw = opt.use_raw_snapshots || strategy.metric.wants_raw_snapshots();
        const auto timeline = compute_tpr_stream(visible, opt.tpr, raw);
        const auto groups = visible.timestamp_groups();
        if (timeline.size() < 2) {
            for (std::size_t i = 0; i < take; ++i) plan.removed.push_back({i, 0.0, i});
        } else {
            const auto ranked = rank_timestamps(timeline, strategy.metric, opt.use_raw_snapshots);
            std::vector<double> combined;
            for (const auto& ts : ranked) {
                const auto remaining = take - plan.removed.size();
                if (remaining == 0) break;
                const auto begin = groups[ts.position].second;
                const auto end = ts.position + 1 < groups.size() ? groups[ts.position + 1].second : visible.edge_count();
                if (end - begin <= remaining) {
                    for (auto i = begin; i < end; ++i) plan.removed.push_back({i, ts.delta, plan.removed.size()});
                    continue;
                }
                if (combined.empty())
                    combined = compute_combined_ter(visible, timeline, opt.combined_weight, opt.use_raw_snapshots);
                std::vector<ScoredEdge> inside;
                for (auto i = begin; i < end; ++i) inside.push_back({i, combined[i]});
                detail::rank_descending(inside);
                for (std::size_t r = 0; r < remaining; ++r)
                    plan.removed.push_back({inside[r].index, ts.delta, plan.removed.size()});
            }
        }
    }

    if (plan.budget > plan.visible)
        throw BudgetExceeded("budget " + std::to_string(plan.budget) + " exceeds the " +
                                 std::to_string(plan.visible) + " visible edges",
                             std::move(plan));
    return plan;
}

} // namespace tgp
