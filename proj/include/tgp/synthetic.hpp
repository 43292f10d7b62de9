#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <vector>

#include "tgp/error.hpp"
#include "tgp/graph.hpp"
#include "tgp/rng.hpp"

namespace tgp {

/// Random interaction stream with skewed node activity and integer timestamps.
struct SyntheticSpec {
    std::size_t nodes = 1000;
    std::size_t edges = 10000;
    /// Timestamps are integers in [0, duration).
    double duration = 2500.0;
    bool bipartite = false;
    /// Fraction of nodes on the source side when bipartite.
    double source_share = 0.5;
    /// Node weights follow rank^(-skew).
    double skew = 0.5;
    std::size_t feature_count = 0;
    std::uint64_t seed = 1;
};

namespace detail {

/// Picks indices in proportion to their weights.
class WeightedPicker {
public:
    explicit WeightedPicker(std::vector<double> weights) : cumulative_(std::move(weights)) {
        std::partial_sum(cumulative_.begin(), cumulative_.end(), cumulative_.begin());
    }
    std::size_t pick(Rng& rng) const {
        const double x = rng.uniform() * cumulative_.back();
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), x);
        return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), cumulative_.size() - 1);
    }

private:
    std::vector<double> cumulative_;
};

inline std::vector<double> skewed_weights(std::size_t n, double skew, Rng& rng) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = std::pow(static_cast<double>(i + 1), -skew);
    for (std::size_t i = n; i > 1; --i) std::swap(w[i - 1], w[rng.index(i)]);
    return w;
}

} // namespace detail

inline TemporalGraph synthetic_stream(const SyntheticSpec& spec) {
    if (spec.nodes < 2) throw InputError("synthetic stream needs at least two nodes");
    if (!(spec.duration >= 1.0)) throw InputError("synthetic duration must be at least 1");
    Rng rng(spec.seed);
    auto table = std::make_shared<NodeTable>(spec.bipartite);
    std::size_t n_src = spec.nodes, n_dst = spec.nodes;
    if (spec.bipartite) {
        n_src = std::clamp<std::size_t>(static_cast<std::size_t>(std::round(spec.source_share * spec.nodes)), 1,
                                        spec.nodes - 1);
        n_dst = spec.nodes - n_src;
    }
    std::vector<NodeId> src_ids(n_src), dst_ids;
    if (spec.bipartite) {
        // Item ids continue after user ids so the two columns never share a number.
        for (std::size_t i = 0; i < n_src; ++i) src_ids[i] = table->intern(static_cast<std::int64_t>(i), Side::Source);
        dst_ids.resize(n_dst);
        for (std::size_t i = 0; i < n_dst; ++i)
            dst_ids[i] = table->intern(static_cast<std::int64_t>(n_src + i), Side::Target);
    } else {
        for (std::size_t i = 0; i < n_src; ++i) src_ids[i] = table->intern(static_cast<std::int64_t>(i), Side::Any);
        dst_ids = src_ids;
    }
    const detail::WeightedPicker src_pick(detail::skewed_weights(n_src, spec.skew, rng));
    const detail::WeightedPicker dst_pick(spec.bipartite ? detail::skewed_weights(n_dst, spec.skew, rng)
                                                         : detail::skewed_weights(n_src, spec.skew, rng));

    std::vector<double> times(spec.edges);
    for (auto& t : times) t = std::floor(rng.uniform() * spec.duration);
    std::sort(times.begin(), times.end());

    std::vector<TemporalEdge> edges;
    edges.reserve(spec.edges);
    for (const double t : times) {
        TemporalEdge e;
        e.source = src_ids[src_pick.pick(rng)];
        do {
            e.target = dst_ids[dst_pick.pick(rng)];
        } while (e.target == e.source);
        e.timestamp = t;
        e.features.resize(spec.feature_count);
        for (auto& f : e.features) f = rng.normal();
        edges.push_back(std::move(e));
    }
    return TemporalGraph(std::move(edges), std::move(table), spec.feature_count);
}

/// Concatenates `copies` copies of the stream in time over the same nodes,
/// each shifted past the end of the previous one.
inline TemporalGraph replicate_in_time(const TemporalGraph& graph, std::size_t copies) {
    if (copies == 0) throw InputError("replicate_in_time needs at least one copy");
    if (graph.empty()) return graph;
    const auto ts = graph.timestamps();
    const double span = ts.back() - ts.front() + 1.0;
    std::vector<TemporalEdge> edges;
    edges.reserve(graph.edge_count() * copies);
    for (std::size_t c = 0; c < copies; ++c)
        for (const auto& e : graph.edges()) {
            edges.push_back(e);
            edges.back().timestamp += static_cast<double>(c) * span;
        }
    return TemporalGraph(std::move(edges), graph.node_table(), graph.feature_count());
}

} // namespace tgp
