#pragma once

#include <algorithm>
#include <numeric>
#include <ostream>
#include <span>
#include <vector>

#include "tgp/error.hpp"
#include "tgp/graph.hpp"

namespace tgp {

/// Temporal PageRank parameters: alpha is the jump probability, beta the
/// per-interaction transition decay.
struct TprParams {
    double alpha = 0.85;
    double beta = 0.5;

    void validate() const {
        if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("TPR alpha must lie in (0, 1)");
        if (!(beta >= 0.0 && beta <= 1.0)) throw InputError("TPR beta must lie in [0, 1]");
    }
};

/// One node-score vector per distinct timestamp, stored contiguously.
///
/// Normalized vectors (L1 = 1 unless all-zero) are always stored. Raw
/// vectors are kept only on request since they double the footprint.
class TprTimeline {
public:
    TprTimeline() = default;

    /// Builds a timeline from raw snapshot vectors of equal length.
    static TprTimeline from_raw(std::vector<Timestamp> timestamps, const std::vector<std::vector<double>>& raw,
                                bool keep_raw = true) {
        if (timestamps.size() != raw.size()) throw InputError("timeline: one snapshot per timestamp required");
        TprTimeline tl;
        tl.dim_ = raw.empty() ? 0 : raw.front().size();
        tl.timestamps_ = std::move(timestamps);
        tl.kept_raw_ = keep_raw;
        for (const auto& v : raw) {
            if (v.size() != tl.dim_) throw InputError("timeline: snapshot length mismatch");
            tl.push(v, keep_raw);
        }
        return tl;
    }

    std::size_t size() const noexcept { return timestamps_.size(); }
    std::size_t dim() const noexcept { return dim_; }
    bool empty() const noexcept { return timestamps_.empty(); }
    bool has_raw() const noexcept { return kept_raw_; }
    std::span<const Timestamp> timestamps() const noexcept { return timestamps_; }

    std::span<const double> snapshot(std::size_t i) const {
        return std::span<const double>(normalized_).subspan(i * dim_, dim_);
    }

    std::span<const double> raw_snapshot(std::size_t i) const {
        if (!kept_raw_) throw InputError("timeline was computed without raw snapshots");
        return std::span<const double>(raw_).subspan(i * dim_, dim_);
    }

    std::span<const double> snapshot(std::size_t i, bool raw) const { return raw ? raw_snapshot(i) : snapshot(i); }

    /// Position of timestamp t, or size() when absent.
    std::size_t index_of(Timestamp t) const {
        auto it = std::lower_bound(timestamps_.begin(), timestamps_.end(), t);
        if (it == timestamps_.end() || *it != t) return size();
        return static_cast<std::size_t>(it - timestamps_.begin());
    }

    /// Scalar count held by the timeline, for footprint checks.
    std::size_t stored_values() const noexcept { return normalized_.size() + raw_.size(); }

private:
    friend TprTimeline compute_tpr_stream(const TemporalGraph&, const TprParams&, bool);

    void push(std::span<const double> raw, bool keep_raw) {
        const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
        const auto offset = normalized_.size();
        normalized_.insert(normalized_.end(), raw.begin(), raw.end());
        if (total > 0.0)
            for (std::size_t i = offset; i < normalized_.size(); ++i) normalized_[i] /= total;
        if (keep_raw) raw_.insert(raw_.end(), raw.begin(), raw.end());
    }

    std::vector<Timestamp> timestamps_;
    std::size_t dim_ = 0;
    std::vector<double> normalized_;
    std::vector<double> raw_;
    bool kept_raw_ = false;
};

/// Streaming Temporal PageRank.
///
/// Single pass over the time-ordered stream keeping a score vector r and an
/// active-walk mass vector s. For edge (u, v):
///
///     r(u) += 1 - alpha;  s(u) += 1 - alpha;  r(v) += alpha * s(u)
///     beta < 1:  s(v) += alpha * (1 - beta) * s(u);  s(u) *= beta
///     beta = 1:  s(v) += alpha * s(u);               s(u)  = 0
///
/// A snapshot of r is recorded after the last edge of every distinct timestamp.
inline TprTimeline compute_tpr_stream(const TemporalGraph& graph, const TprParams& params, bool keep_raw = false) {
    params.validate();
    TprTimeline tl;
    const auto n = graph.node_space();
    tl.dim_ = n;
    tl.kept_raw_ = keep_raw;
    std::vector<double> r(n, 0.0), s(n, 0.0);
    const double a = params.alpha;
    const double b = params.beta;
    const auto edges = graph.edges();
    std::size_t distinct = edges.empty() ? 0 : 1;
    for (std::size_t i = 1; i < edges.size(); ++i) distinct += edges[i].timestamp != edges[i - 1].timestamp;
    tl.timestamps_.reserve(distinct);
    tl.normalized_.reserve(distinct * n);
    if (keep_raw) tl.raw_.reserve(distinct * n);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const auto u = edges[i].source;
        const auto v = edges[i].target;
        r[u] += 1.0 - a;
        s[u] += 1.0 - a;
        r[v] += a * s[u];
        if (b < 1.0) {
            s[v] += a * (1.0 - b) * s[u];
            s[u] *= b;
        } else {
            s[v] += a * s[u];
            s[u] = 0.0;
        }
        if (i + 1 == edges.size() || edges[i + 1].timestamp != edges[i].timestamp) {
            tl.timestamps_.push_back(edges[i].timestamp);
            tl.push(r, keep_raw);
        }
    }
    return tl;
}

namespace detail {

inline void check_timeline_matches(const TemporalGraph& graph, const TprTimeline& timeline) {
    const auto groups = graph.timestamp_groups();
    if (groups.size() != timeline.size() || (!graph.empty() && timeline.dim() != graph.node_space()))
        throw InputError("timeline does not match graph");
    for (std::size_t i = 0; i < groups.size(); ++i)
        if (groups[i].first != timeline.timestamps()[i]) throw InputError("timeline does not match graph");
}

inline std::vector<std::size_t> out_degrees(const TemporalGraph& graph) {
    std::vector<std::size_t> deg(graph.node_space(), 0);
    for (const auto& e : graph.edges()) ++deg[e.source];
    return deg;
}

} // namespace detail

struct TerEntry {
    Timestamp timestamp;
    double score;
};

/// Temporal EdgeRank: TER[t] = sum over distinct sources n at t of r^(t)(n) / out_deg(n),
/// with out_deg taken over the whole stream.
inline std::vector<TerEntry> compute_ter(const TemporalGraph& graph, const TprTimeline& timeline,
                                         bool use_raw = false) {
    detail::check_timeline_matches(graph, timeline);
    const auto out_deg = detail::out_degrees(graph);
    const auto groups = graph.timestamp_groups();
    std::vector<TerEntry> ter;
    ter.reserve(groups.size());
    std::vector<NodeId> sources;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto begin = groups[g].second;
        const auto end = g + 1 < groups.size() ? groups[g + 1].second : graph.edge_count();
        sources.clear();
        for (auto i = begin; i < end; ++i) sources.push_back(graph.edge(i).source);
        std::sort(sources.begin(), sources.end());
        sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
        const auto snap = timeline.snapshot(g, use_raw);
        double sum = 0.0;
        for (auto n : sources) sum += snap[n] / static_cast<double>(out_deg[n]);
        ter.push_back({groups[g].first, sum});
    }
    return ter;
}

/// Per-edge Combined-TER: weight * local + (1 - weight) * global, where local
/// is the source's TER contribution r^(t_e)(u) / out_deg(u) at the edge's own
/// timestamp and global uses the final snapshot instead.
inline std::vector<double> compute_combined_ter(const TemporalGraph& graph, const TprTimeline& timeline,
                                                double weight = 0.5, bool use_raw = false) {
    if (!(weight >= 0.0 && weight <= 1.0)) throw InputError("Combined-TER weight must lie in [0, 1]");
    detail::check_timeline_matches(graph, timeline);
    std::vector<double> scores(graph.edge_count(), 0.0);
    if (graph.empty()) return scores;
    const auto out_deg = detail::out_degrees(graph);
    const auto final_snap = timeline.snapshot(timeline.size() - 1, use_raw);
    std::size_t g = 0;
    for (std::size_t i = 0; i < graph.edge_count(); ++i) {
        const auto& e = graph.edge(i);
        while (timeline.timestamps()[g] != e.timestamp) ++g;
        const double deg = static_cast<double>(out_deg[e.source]);
        const double local = timeline.snapshot(g, use_raw)[e.source] / deg;
        const double global = final_snap[e.source] / deg;
        scores[i] = weight * local + (1.0 - weight) * global;
    }
    return scores;
}

/// Writes the timeline as a timestamp x node CSV matrix (debug export).
inline void write_timeline_csv(std::ostream& out, const TprTimeline& timeline, bool raw = false) {
    out.precision(17);
    out << "timestamp";
    for (std::size_t v = 0; v < timeline.dim(); ++v) out << ",n" << v;
    out << '\n';
    for (std::size_t i = 0; i < timeline.size(); ++i) {
        out << timeline.timestamps()[i];
        for (double x : timeline.snapshot(i, raw)) out << ',' << x;
        out << '\n';
    }
}

} // namespace tgp
