#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include "tgp/error.hpp"
#include "tgp/graph.hpp"
#include "tgp/tpr.hpp"

namespace tgp {

struct WalkEnumerationLimits {
    std::size_t max_edges = 16;
    std::size_t max_nodes = 12;
    std::size_t max_walk_len = 6;
};

struct BruteForceTpr {
    std::vector<double> raw;
    std::vector<double> normalized;
    std::size_t walks = 0;
};

/// Temporal PageRank at the final time by explicit enumeration of
/// time-respecting walks.
///
/// Every interaction (u, ., t) starts a walk at u worth 1 - alpha (the k = 0
/// term). A walk of k edges reaching w adds (1 - alpha) * alpha^k times its
/// decay-weighted count. The count multiplies one departure weight per hop:
/// after arriving at x, leaving through the j-th later out-edge of x has weight
/// (1 - beta) * beta^(j-1), a geometric law over the candidate departures. The
/// first hop may leave through the starting interaction itself (weight 1) or a
/// later out-edge of u (weight beta^j); there is no (1 - beta) factor because
/// nothing has been transferred yet. With beta in {0, 1} only the next
/// out-edge is taken and the hop weight is 1.
///
/// Walks longer than max_walk_len are dropped, so the result truncates the
/// alpha^k series. Exponential in the walk length; meant for tiny graphs.
inline BruteForceTpr brute_force_tpr(const TemporalGraph& graph, const TprParams& params, std::size_t max_walk_len,
                                     WalkEnumerationLimits limits = {}) {
    params.validate();
    if (graph.edge_count() > limits.max_edges || graph.node_count() > limits.max_nodes ||
        max_walk_len > limits.max_walk_len)
        throw InputError("instance too large for walk enumeration");

    const double alpha = params.alpha;
    const double beta = params.beta;
    const bool hard = beta == 1.0 || beta == 0.0;
    const double transfer = hard ? 1.0 : 1.0 - beta;
    auto stay = [&](std::size_t skipped) {
        if (hard) return skipped == 0 ? 1.0 : 0.0;
        return std::pow(beta, static_cast<double>(skipped));
    };

    const auto edges = graph.edges();
    const auto m = edges.size();
    BruteForceTpr out;
    out.raw.assign(graph.node_space(), 0.0);

    // Extend a walk sitting at `node`, where `after` is the first edge index a
    // departure may use, `skipped` counts out-edges of `node` already passed,
    // and `mass` is the walk's share before the departure weight is applied.
    auto extend = [&](auto&& self, NodeId node, std::size_t after, double mass, std::size_t length) -> void {
        if (length == max_walk_len) return;
        std::size_t skipped = 0;
        for (std::size_t d = after; d < m; ++d) {
            if (edges[d].source != node) continue;
            const double share = mass * stay(skipped);
            ++skipped;
            if (share == 0.0) continue;
            out.raw[edges[d].target] += alpha * share;
            ++out.walks;
            self(self, edges[d].target, d + 1, alpha * transfer * share, length + 1);
        }
    };

    for (std::size_t s = 0; s < m; ++s) {
        const NodeId u = edges[s].source;
        out.raw[u] += 1.0 - alpha;
        ++out.walks;
        extend(extend, u, s, 1.0 - alpha, 0);
    }

    out.normalized = out.raw;
    const double total = std::accumulate(out.raw.begin(), out.raw.end(), 0.0);
    if (total > 0.0)
        for (auto& x : out.normalized) x /= total;
    return out;
}

} // namespace tgp
