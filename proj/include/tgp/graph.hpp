#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tgp/error.hpp"

namespace tgp {

/// Dense node index. Original dataset ids live in the NodeTable.
using NodeId = std::uint32_t;
using Timestamp = double;

inline constexpr Timestamp kInfinity = std::numeric_limits<Timestamp>::infinity();

enum class Side : std::uint8_t { Any, Source, Target };

struct TemporalEdge {
    NodeId source = 0;
    NodeId target = 0;
    Timestamp timestamp = 0.0;
    std::vector<double> features;
    std::int64_t label = 0;
};

/// Mapping between dense ids and the ids found in the dataset file.
///
/// Bipartite streams keep two id spaces: user 7 and item 7 are different nodes.
class NodeTable {
public:
    NodeTable() = default;
    explicit NodeTable(bool bipartite) : bipartite_(bipartite) {}

    bool bipartite() const noexcept { return bipartite_; }
    std::size_t size() const noexcept { return original_.size(); }

    NodeId intern(std::int64_t original, Side side) {
        const Side key_side = bipartite_ ? side : Side::Any;
        auto& map = key_side == Side::Target ? target_ids_ : source_ids_;
        if (auto it = map.find(original); it != map.end()) return it->second;
        const auto id = static_cast<NodeId>(original_.size());
        map.emplace(original, id);
        original_.push_back(original);
        side_.push_back(key_side);
        return id;
    }

    /// Dense id for an original id, or nullopt when unknown.
    std::optional<NodeId> find(std::int64_t original, Side side) const {
        const Side key_side = bipartite_ ? side : Side::Any;
        const auto& map = key_side == Side::Target ? target_ids_ : source_ids_;
        if (auto it = map.find(original); it != map.end()) return it->second;
        return std::nullopt;
    }

    std::int64_t original(NodeId id) const { return original_.at(id); }
    Side side(NodeId id) const { return side_.at(id); }

private:
    bool bipartite_ = false;
    std::vector<std::int64_t> original_;
    std::vector<Side> side_;
    std::unordered_map<std::int64_t, NodeId> source_ids_;
    std::unordered_map<std::int64_t, NodeId> target_ids_;
};

/// Time-ordered interaction stream. Immutable once built.
///
/// Several graphs (the splits, a poisoned copy) may share one NodeTable, so
/// node_space() is the size of the shared id space while node_count() counts
/// the nodes that actually appear in this stream.
class TemporalGraph {
public:
    TemporalGraph() : nodes_(std::make_shared<NodeTable>()) {}

    /// Sorts `edges` stably by timestamp and validates every invariant.
    TemporalGraph(std::vector<TemporalEdge> edges, std::shared_ptr<const NodeTable> nodes,
                  std::size_t feature_count = 0)
        : edges_(std::move(edges)), nodes_(std::move(nodes)), feature_count_(feature_count) {
        if (!nodes_) throw InputError("graph requires a node table");
        for (std::size_t i = 0; i < edges_.size(); ++i) {
            const auto& e = edges_[i];
            if (e.source == e.target)
                throw InputError("self-loop at edge " + std::to_string(i));
            if (!std::isfinite(e.timestamp) || e.timestamp < 0.0)
                throw InputError("timestamp must be finite and non-negative at edge " +
                                 std::to_string(i));
            if (e.source >= nodes_->size() || e.target >= nodes_->size())
                throw InputError("edge " + std::to_string(i) + " references an unknown node");
            if (nodes_->bipartite() &&
                (nodes_->side(e.source) != Side::Source || nodes_->side(e.target) != Side::Target))
                throw InputError("edge " + std::to_string(i) + " violates the bipartite partition");
        }
        if (!std::is_sorted(edges_.begin(), edges_.end(), by_time)) {
            std::stable_sort(edges_.begin(), edges_.end(), by_time);
            resorted_ = true;
        }
        timestamps_.reserve(edges_.size());
        for (const auto& e : edges_) timestamps_.push_back(e.timestamp);
        std::vector<bool> seen(nodes_->size(), false);
        for (const auto& e : edges_) {
            node_count_ += !seen[e.source];
            seen[e.source] = true;
            node_count_ += !seen[e.target];
            seen[e.target] = true;
        }
    }

    std::span<const TemporalEdge> edges() const noexcept { return edges_; }
    const TemporalEdge& edge(std::size_t i) const { return edges_.at(i); }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    bool empty() const noexcept { return edges_.empty(); }

    /// Number of distinct nodes appearing in the stream.
    std::size_t node_count() const noexcept { return node_count_; }
    /// Size of the (possibly shared) dense id space.
    std::size_t node_space() const noexcept { return nodes_->size(); }

    bool bipartite() const noexcept { return nodes_->bipartite(); }
    std::size_t feature_count() const noexcept { return feature_count_; }
    const NodeTable& nodes() const noexcept { return *nodes_; }
    const std::shared_ptr<const NodeTable>& node_table() const noexcept { return nodes_; }

    /// Sorted timestamps, parallel to edges().
    std::span<const Timestamp> timestamps() const noexcept { return timestamps_; }

    /// True when construction had to reorder the input.
    bool was_resorted() const noexcept { return resorted_; }

    /// Edges [begin, end) of this stream as a new graph over the same node table.
    TemporalGraph slice(std::size_t begin, std::size_t end) const {
        end = std::min(end, edges_.size());
        begin = std::min(begin, end);
        return TemporalGraph(std::vector<TemporalEdge>(edges_.begin() + static_cast<std::ptrdiff_t>(begin),
                                                       edges_.begin() + static_cast<std::ptrdiff_t>(end)),
                             nodes_, feature_count_);
    }

    TemporalGraph prefix(std::size_t count) const { return slice(0, count); }

    /// Index range [first, last) of edges with timestamp in [lo, hi].
    std::pair<std::size_t, std::size_t> time_range(Timestamp lo, Timestamp hi) const {
        const auto first = std::lower_bound(timestamps_.begin(), timestamps_.end(), lo);
        const auto last = std::upper_bound(first, timestamps_.end(), hi);
        return {static_cast<std::size_t>(first - timestamps_.begin()),
                static_cast<std::size_t>(last - timestamps_.begin())};
    }

    /// Sorted distinct timestamps with the index of the first edge of each.
    std::vector<std::pair<Timestamp, std::size_t>> timestamp_groups() const {
        std::vector<std::pair<Timestamp, std::size_t>> groups;
        for (std::size_t i = 0; i < timestamps_.size(); ++i)
            if (i == 0 || timestamps_[i] != timestamps_[i - 1]) groups.emplace_back(timestamps_[i], i);
        return groups;
    }

private:
    static bool by_time(const TemporalEdge& a, const TemporalEdge& b) { return a.timestamp < b.timestamp; }

    std::vector<TemporalEdge> edges_;
    std::vector<Timestamp> timestamps_;
    std::shared_ptr<const NodeTable> nodes_;
    std::size_t feature_count_ = 0;
    std::size_t node_count_ = 0;
    bool resorted_ = false;
};

/// Static aggregation of every edge with timestamp <= cutoff.
struct StaticAggregate {
    Timestamp cutoff = 0.0;
    std::size_t edge_count = 0;
    /// Undirected neighbor multiset: each edge (u,v) lists v under u and u under v.
    std::vector<std::vector<NodeId>> adjacency;
    std::vector<std::size_t> out_degree;
    std::vector<std::size_t> in_degree;
};

inline StaticAggregate aggregate_until(const TemporalGraph& graph, Timestamp cutoff) {
    StaticAggregate agg;
    agg.cutoff = cutoff;
    const auto n = graph.node_space();
    agg.adjacency.resize(n);
    agg.out_degree.assign(n, 0);
    agg.in_degree.assign(n, 0);
    for (const auto& e : graph.edges()) {
        if (e.timestamp > cutoff) break;
        agg.adjacency[e.source].push_back(e.target);
        agg.adjacency[e.target].push_back(e.source);
        ++agg.out_degree[e.source];
        ++agg.in_degree[e.target];
        ++agg.edge_count;
    }
    return agg;
}

/// Nodes incident to an edge with timestamp in the closed window [t - window, t].
inline std::vector<NodeId> active_nodes(const TemporalGraph& graph, Timestamp t, Timestamp window) {
    if (!(window > 0.0)) throw InputError("activity window must be positive");
    const auto [first, last] = graph.time_range(t - window, t);
    std::vector<NodeId> out;
    out.reserve(2 * (last - first));
    for (std::size_t i = first; i < last; ++i) {
        out.push_back(graph.edge(i).source);
        out.push_back(graph.edge(i).target);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// Per-node sorted event times, for O(log d) activity queries.
class ActivityIndex {
public:
    explicit ActivityIndex(const TemporalGraph& graph) : times_(graph.node_space()) {
        for (const auto& e : graph.edges()) {
            times_[e.source].push_back(e.timestamp);
            times_[e.target].push_back(e.timestamp);
        }
    }

    std::span<const Timestamp> events(NodeId v) const { return times_.at(v); }

    /// True when v has an event in [t - window, t].
    bool active(NodeId v, Timestamp t, Timestamp window) const {
        const auto& ts = times_.at(v);
        auto it = std::lower_bound(ts.begin(), ts.end(), t - window);
        return it != ts.end() && *it <= t;
    }

    /// Latest event of v at or before t, or -infinity.
    Timestamp last_at_or_before(NodeId v, Timestamp t) const {
        const auto& ts = times_.at(v);
        auto it = std::upper_bound(ts.begin(), ts.end(), t);
        return it == ts.begin() ? -kInfinity : *(it - 1);
    }

private:
    std::vector<std::vector<Timestamp>> times_;
};

/// Per-node balance of deletions and insertions, per direction.
class DegreeLedger {
public:
    struct Record {
        std::size_t original_out = 0;
        std::size_t original_in = 0;
        std::size_t deletions_out = 0;
        std::size_t deletions_in = 0;
        std::size_t insertions_out = 0;
        std::size_t insertions_in = 0;
    };

    DegreeLedger() = default;
    explicit DegreeLedger(const TemporalGraph& graph) : records_(graph.node_space()) {
        for (const auto& e : graph.edges()) {
            ++records_[e.source].original_out;
            ++records_[e.target].original_in;
        }
    }

    void record_deletion(NodeId u, NodeId v) {
        ++records_.at(u).deletions_out;
        ++records_.at(v).deletions_in;
    }
    void record_insertion(NodeId u, NodeId v) {
        ++records_.at(u).insertions_out;
        ++records_.at(v).insertions_in;
    }

    const Record& operator[](NodeId v) const { return records_.at(v); }
    std::size_t size() const noexcept { return records_.size(); }

    /// insertions - deletions for outgoing edges.
    std::int64_t balance_out(NodeId v) const {
        const auto& r = records_.at(v);
        return static_cast<std::int64_t>(r.insertions_out) - static_cast<std::int64_t>(r.deletions_out);
    }
    std::int64_t balance_in(NodeId v) const {
        const auto& r = records_.at(v);
        return static_cast<std::int64_t>(r.insertions_in) - static_cast<std::int64_t>(r.deletions_in);
    }

private:
    std::vector<Record> records_;
};

struct SplitRatios {
    double train = 0.7;
    double val = 0.15;
    double test = 0.15;
};

struct ChronologicalSplit {
    TemporalGraph train;
    TemporalGraph val;
    TemporalGraph test;
};

/// floor(fraction * count), tolerant of binary representation error in
/// fractions such as 0.29 whose product should land on an integer.
inline std::size_t floor_fraction(double fraction, std::size_t count) {
    const double x = fraction * static_cast<double>(count);
    const double nearest = std::round(x);
    if (std::abs(x - nearest) <= 1e-9 * std::max(1.0, std::abs(x))) return static_cast<std::size_t>(nearest);
    return static_cast<std::size_t>(std::floor(x));
}

inline ChronologicalSplit chronological_split(const TemporalGraph& graph, SplitRatios ratios = {}) {
    if (std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9)
        throw InputError("split ratios must sum to 1");
    if (ratios.train < 0 || ratios.val < 0 || ratios.test < 0)
        throw InputError("split ratios must be non-negative");
    if (graph.empty()) throw InputError("cannot split an empty graph");
    const auto n = graph.edge_count();
    const auto n_train = floor_fraction(ratios.train, n);
    const auto n_val = floor_fraction(ratios.val, n);
    if (n_train == 0 || n_val == 0) warn("chronological split produced an empty train or validation piece");
    return {graph.slice(0, n_train), graph.slice(n_train, n_train + n_val), graph.slice(n_train + n_val, n)};
}

} // namespace tgp
