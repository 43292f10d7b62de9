#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "tgp/error.hpp"
#include "tgp/graph.hpp"
#include "tgp/manifest.hpp"

namespace tgp {

/// Which perturbations a run was allowed to make, and so which checks apply.
enum class AuditMode {
    Full, ///< removals and insertions: every check
    Add,  ///< insertions only: C1, C2, novelty, bipartite
    Rem,  ///< removals only: C1
};

inline std::string_view to_string(AuditMode m) {
    switch (m) {
    case AuditMode::Full: return "full";
    case AuditMode::Add: return "add";
    case AuditMode::Rem: return "rem";
    }
    return "?";
}

inline std::optional<AuditMode> audit_mode_from_string(std::string_view s) {
    if (s == "full") return AuditMode::Full;
    if (s == "add") return AuditMode::Add;
    if (s == "rem") return AuditMode::Rem;
    return std::nullopt;
}

struct AuditThresholds {
    AuditMode mode = AuditMode::Full;
    /// Delta. Taken from the manifest when unset.
    std::optional<std::size_t> budget;
    /// Edges of the original stream the attacker saw; C2 compares against
    /// their timestamps. Taken from the manifest, else the whole stream.
    std::optional<std::size_t> visible;
    double window = 1800.0;
    std::size_t capacity = 1;
    double ks_threshold = 0.1;
    /// C2 is only enforced with at least this many insertions.
    std::size_t ks_min_samples = 100;
};

struct AuditReport {
    AuditMode mode = AuditMode::Full;

    struct {
        std::size_t budget = 0, removed = 0, inserted = 0;
        bool pass = true;
    } c1;
    struct {
        double ks = 0.0, threshold = 0.1;
        std::size_t samples = 0, min_samples = 0;
        bool checked = false, enforced = false, pass = true;
    } c2;
    struct {
        double window = 0.0;
        std::size_t violations = 0, total = 0;
        bool checked = false, pass = true;
    } c3;
    struct {
        std::size_t capacity = 1, max_out_delta = 0, max_in_delta = 0, nodes_over = 0;
        double histogram_tv = 0.0;
        bool checked = false, pass = true;
    } c4;
    struct {
        std::size_t violations = 0;
        bool checked = false, pass = true;
    } novelty;
    struct {
        std::size_t violations = 0;
        bool checked = false, pass = true;
    } bipartite;
    struct {
        bool checked = false, consistent = true;
        std::size_t unmatched_removals = 0, unmatched_insertions = 0;
    } manifest;
    std::vector<std::string> warnings;

    bool passed() const {
        return c1.pass && c2.pass && c3.pass && c4.pass && novelty.pass && bipartite.pass && manifest.consistent;
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["passed"] = passed();
        j["mode"] = to_string(mode);
        j["c1"] = {{"budget", c1.budget}, {"removed", c1.removed}, {"inserted", c1.inserted}, {"pass", c1.pass}};
        j["c2"] = {{"checked", c2.checked},     {"ks_statistic", c2.ks}, {"threshold", c2.threshold},
                   {"samples", c2.samples},     {"min_samples", c2.min_samples},
                   {"enforced", c2.enforced},   {"pass", c2.pass}};
        j["c3"] = {{"checked", c3.checked}, {"window", c3.window}, {"violations", c3.violations},
                   {"total_inserted", c3.total}, {"pass", c3.pass}};
        j["c4"] = {{"checked", c4.checked},
                   {"capacity", c4.capacity},
                   {"max_out_delta", c4.max_out_delta},
                   {"max_in_delta", c4.max_in_delta},
                   {"nodes_over_capacity", c4.nodes_over},
                   {"degree_histogram_tv", c4.histogram_tv},
                   {"pass", c4.pass}};
        j["novelty"] = {{"checked", novelty.checked}, {"violations", novelty.violations}, {"pass", novelty.pass}};
        j["bipartite"] = {{"checked", bipartite.checked}, {"violations", bipartite.violations}, {"pass", bipartite.pass}};
        j["manifest"] = {{"checked", manifest.checked},
                         {"consistent", manifest.consistent},
                         {"unmatched_removals", manifest.unmatched_removals},
                         {"unmatched_insertions", manifest.unmatched_insertions}};
        j["warnings"] = warnings;
        return j;
    }

    std::string to_text() const {
        std::ostringstream out;
        const auto flag = [](bool checked, bool pass) { return !checked ? "skip" : pass ? "PASS" : "FAIL"; };
        out << "audit (" << to_string(mode) << "): " << (passed() ? "PASS" : "FAIL") << '\n';
        out << "  C1 budget     " << flag(true, c1.pass) << "  delta=" << c1.budget << " removed=" << c1.removed
            << " inserted=" << c1.inserted << '\n';
        out << "  C2 timestamps " << flag(c2.checked, c2.pass) << "  ks=" << c2.ks << " threshold=" << c2.threshold
            << " samples=" << c2.samples << (c2.checked && !c2.enforced ? " (below min samples, not enforced)" : "")
            << '\n';
        out << "  C3 activity   " << flag(c3.checked, c3.pass) << "  violations=" << c3.violations << '/' << c3.total
            << " window=" << c3.window << '\n';
        out << "  C4 degrees    " << flag(c4.checked, c4.pass) << "  max_out=" << c4.max_out_delta
            << " max_in=" << c4.max_in_delta << " over_capacity=" << c4.nodes_over << " tv=" << c4.histogram_tv
            << '\n';
        out << "  novelty       " << flag(novelty.checked, novelty.pass) << "  violations=" << novelty.violations << '\n';
        out << "  bipartite     " << flag(bipartite.checked, bipartite.pass) << "  violations=" << bipartite.violations
            << '\n';
        if (manifest.checked)
            out << "  manifest      " << (manifest.consistent ? "consistent" : "INCONSISTENT")
                << "  unmatched_removals=" << manifest.unmatched_removals
                << " unmatched_insertions=" << manifest.unmatched_insertions << '\n';
        for (const auto& w : warnings) out << "  warning: " << w << '\n';
        return out.str();
    }
};

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
inline double ks_statistic(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw InputError("KS statistic needs two non-empty samples");
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
    }
    return d;
}

namespace detail {

/// Maps nodes of another stream, or manifest ids, onto the original stream's
/// dense ids. Ids unknown to the original get fresh ids past its id space.
class NodeResolver {
public:
    explicit NodeResolver(const NodeTable& original) : original_(original), next_(static_cast<NodeId>(original.size())) {}

    NodeId resolve(std::int64_t id, Side side) {
        if (auto v = find(id, side)) return *v;
        const auto key = std::make_pair(id, original_.bipartite() ? side : Side::Any);
        auto [it, inserted] = extra_.try_emplace(key, next_);
        if (inserted) ++next_;
        return it->second;
    }

    /// Looks on the declared side first, then the other one, so a user id
    /// written into the item column still names that user.
    std::optional<NodeId> find(std::int64_t id, Side side) const {
        if (!original_.bipartite()) return original_.find(id, Side::Any);
        if (side == Side::Target) {
            if (auto v = original_.find(id, Side::Target)) return v;
            return original_.find(id, Side::Source);
        }
        if (auto v = original_.find(id, Side::Source)) return v;
        return original_.find(id, Side::Target);
    }

    bool known(NodeId v) const { return v < original_.size(); }
    std::size_t space() const { return next_; }

private:
    const NodeTable& original_;
    NodeId next_;
    std::map<std::pair<std::int64_t, Side>, NodeId> extra_;
};

using EdgeKey = std::tuple<NodeId, NodeId, Timestamp>;

inline std::vector<EdgeKey> multiset_minus(const std::vector<EdgeKey>& a, const std::vector<EdgeKey>& b) {
    std::vector<EdgeKey> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline std::uint64_t undirected_key(NodeId a, NodeId b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

} // namespace detail

/// Checks C1-C4, novelty and partitions from the two streams themselves. E'
/// and E~ are the multiset differences of the edge lists; a manifest, when
/// given, is only compared against them.
inline AuditReport audit(const TemporalGraph& original, const TemporalGraph& poisoned, const Manifest* manifest,
                         AuditThresholds th) {
    if (!(th.window > 0.0)) throw InputError("audit window must be positive");
    AuditReport rep;
    rep.mode = th.mode;
    if (manifest) {
        if (!th.budget) th.budget = manifest->budget();
        if (!th.visible && manifest->meta.contains("visible")) th.visible = manifest->meta["visible"].get<std::size_t>();
    }

    detail::NodeResolver resolver(original.nodes());
    const auto& pt = poisoned.nodes();
    // Endpoints resolve by column: sources against source ids, targets against target ids.
    std::vector<NodeId> as_source(pt.size()), as_target(pt.size());
    std::vector<bool> declared_source(pt.size(), true), declared_target(pt.size(), true);
    for (NodeId v = 0; v < pt.size(); ++v) {
        const auto id = pt.original(v);
        as_source[v] = resolver.resolve(id, Side::Source);
        as_target[v] = resolver.resolve(id, Side::Target);
        if (original.bipartite()) {
            declared_source[v] = original.nodes().find(id, Side::Source).has_value();
            declared_target[v] = original.nodes().find(id, Side::Target).has_value();
        }
    }

    std::vector<detail::EdgeKey> before, after;
    before.reserve(original.edge_count());
    after.reserve(poisoned.edge_count());
    for (const auto& e : original.edges()) before.emplace_back(e.source, e.target, e.timestamp);
    for (const auto& e : poisoned.edges()) after.emplace_back(as_source[e.source], as_target[e.target], e.timestamp);
    std::sort(before.begin(), before.end());
    std::sort(after.begin(), after.end());
    const auto removed = detail::multiset_minus(before, after);
    const auto inserted = detail::multiset_minus(after, before);

    // Inserted edges with the poisoned-side node, needed for the partition check.
    std::vector<std::pair<NodeId, NodeId>> inserted_poisoned_nodes;
    {
        std::vector<std::pair<detail::EdgeKey, std::pair<NodeId, NodeId>>> tagged;
        for (const auto& e : poisoned.edges())
            tagged.push_back({{as_source[e.source], as_target[e.target], e.timestamp}, {e.source, e.target}});
        std::sort(tagged.begin(), tagged.end());
        std::size_t k = 0;
        for (const auto& key : inserted) {
            while (k < tagged.size() && tagged[k].first < key) ++k;
            inserted_poisoned_nodes.push_back(tagged[k].second);
            ++k;
        }
    }

    if (poisoned.empty()) rep.warnings.push_back("poisoned stream is empty");

    // C1
    rep.c1.removed = removed.size();
    rep.c1.inserted = inserted.size();
    switch (th.mode) {
    case AuditMode::Full:
        rep.c1.budget = th.budget.value_or(removed.size());
        rep.c1.pass = removed.size() == rep.c1.budget && inserted.size() == rep.c1.budget;
        break;
    case AuditMode::Add:
        rep.c1.budget = th.budget.value_or(inserted.size());
        rep.c1.pass = removed.empty() && inserted.size() == rep.c1.budget;
        break;
    case AuditMode::Rem:
        rep.c1.budget = th.budget.value_or(removed.size());
        rep.c1.pass = inserted.empty() && removed.size() == rep.c1.budget;
        break;
    }
    if (!original.empty() && rep.c1.removed == original.edge_count())
        rep.warnings.push_back("every original edge was removed");

    const bool inserts_checked = th.mode != AuditMode::Rem;
    const bool structure_checked = th.mode == AuditMode::Full;

    // C2
    rep.c2.threshold = th.ks_threshold;
    rep.c2.min_samples = th.ks_min_samples;
    rep.c2.samples = inserted.size();
    if (inserts_checked && !inserted.empty() && !original.empty()) {
        rep.c2.checked = true;
        std::vector<double> ins_times;
        for (const auto& k : inserted) ins_times.push_back(std::get<2>(k));
        const auto visible = std::min(th.visible.value_or(original.edge_count()), original.edge_count());
        const auto ref = original.timestamps().subspan(0, std::max<std::size_t>(visible, 1));
        rep.c2.ks = ks_statistic(ins_times, ref);
        rep.c2.enforced = inserted.size() >= th.ks_min_samples;
        rep.c2.pass = !rep.c2.enforced || rep.c2.ks <= th.ks_threshold;
    }

    // C3
    rep.c3.window = th.window;
    rep.c3.total = inserted.size();
    if (structure_checked) {
        rep.c3.checked = true;
        const ActivityIndex activity(original);
        for (const auto& [u, v, t] : inserted) {
            const bool ok = resolver.known(u) && resolver.known(v) && activity.active(u, t, th.window) &&
                            activity.active(v, t, th.window);
            rep.c3.violations += !ok;
        }
        rep.c3.pass = rep.c3.violations == 0;
    }

    // C4
    rep.c4.capacity = th.capacity;
    if (structure_checked) {
        rep.c4.checked = true;
        const auto n = resolver.space();
        std::vector<std::int64_t> out0(n, 0), in0(n, 0), out1(n, 0), in1(n, 0);
        for (const auto& [u, v, t] : before) ++out0[u], ++in0[v];
        for (const auto& [u, v, t] : after) ++out1[u], ++in1[v];
        std::map<std::int64_t, std::int64_t> hist_gap;
        std::size_t population = 0;
        for (std::size_t v = 0; v < n; ++v) {
            const auto dout = static_cast<std::size_t>(std::abs(out1[v] - out0[v]));
            const auto din = static_cast<std::size_t>(std::abs(in1[v] - in0[v]));
            rep.c4.max_out_delta = std::max(rep.c4.max_out_delta, dout);
            rep.c4.max_in_delta = std::max(rep.c4.max_in_delta, din);
            rep.c4.nodes_over += (dout > th.capacity || din > th.capacity);
            const auto d0 = out0[v] + in0[v], d1 = out1[v] + in1[v];
            if (d0 == 0 && d1 == 0) continue;
            ++population;
            ++hist_gap[d0];
            --hist_gap[d1];
        }
        double tv = 0.0;
        for (const auto& [deg, gap] : hist_gap) tv += static_cast<double>(std::abs(gap));
        rep.c4.histogram_tv = population ? 0.5 * tv / static_cast<double>(population) : 0.0;
        rep.c4.pass = rep.c4.nodes_over == 0;
    }

    // Novelty: no earlier interaction in either direction, in the original
    // stream or among earlier insertions.
    if (inserts_checked) {
        rep.novelty.checked = true;
        std::unordered_map<std::uint64_t, Timestamp> first_seen;
        for (const auto& e : original.edges()) first_seen.try_emplace(detail::undirected_key(e.source, e.target), e.timestamp);
        std::unordered_map<std::uint64_t, std::size_t> inserted_pairs;
        for (const auto& [u, v, t] : inserted) {
            const auto key = detail::undirected_key(u, v);
            const auto it = first_seen.find(key);
            const bool seen_before = it != first_seen.end() && it->second <= t;
            const bool repeated = inserted_pairs[key]++ > 0;
            rep.novelty.violations += (seen_before || repeated);
        }
        rep.novelty.pass = rep.novelty.violations == 0;
    }

    // Partitions
    if (inserts_checked && original.bipartite()) {
        rep.bipartite.checked = true;
        for (const auto& [ps, pd] : inserted_poisoned_nodes)
            rep.bipartite.violations += (!declared_source[ps] || !declared_target[pd]);
        rep.bipartite.pass = rep.bipartite.violations == 0;
    }

    if (manifest) {
        rep.manifest.checked = true;
        std::vector<detail::EdgeKey> claimed_removed, claimed_inserted;
        for (const auto& r : manifest->removals)
            claimed_removed.emplace_back(resolver.resolve(r.source, Side::Source), resolver.resolve(r.target, Side::Target),
                                         r.timestamp);
        for (const auto& r : manifest->insertions)
            claimed_inserted.emplace_back(resolver.resolve(r.source, Side::Source),
                                          resolver.resolve(r.target, Side::Target), r.timestamp);
        std::sort(claimed_removed.begin(), claimed_removed.end());
        std::sort(claimed_inserted.begin(), claimed_inserted.end());
        rep.manifest.unmatched_removals = detail::multiset_minus(claimed_removed, removed).size() +
                                          detail::multiset_minus(removed, claimed_removed).size();
        rep.manifest.unmatched_insertions = detail::multiset_minus(claimed_inserted, inserted).size() +
                                            detail::multiset_minus(inserted, claimed_inserted).size();
        rep.manifest.consistent = rep.manifest.unmatched_removals == 0 && rep.manifest.unmatched_insertions == 0;
    }
    return rep;
}

} // namespace tgp
