#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <limits>
#include <numeric>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "tgp/error.hpp"
#include "tgp/graph.hpp"
#include "tgp/kde.hpp"
#include "tgp/rng.hpp"
#include "tgp/sparsify.hpp"

namespace tgp {

struct SamplerParams {
    /// Activity window W, in dataset time units.
    double window = 1800.0;
    /// Maximum net insertions per node and direction beyond its deletions.
    std::size_t node_capacity = 1;
    /// Recovery rounds allowed after the first pass.
    std::size_t max_attempts = 3;
    std::uint64_t rng_seed = 0;
    /// Candidate timestamps inspected per GetValidEdges call.
    std::size_t candidate_timestamps = 8;
    /// Recovery rounds draw this many fresh timestamps per missing insertion.
    double recovery_oversample = 8.0;

    void validate() const {
        if (!(window > 0.0)) throw InputError("sampler window must be positive");
        if (node_capacity < 1) throw InputError("node capacity must be at least 1");
        if (max_attempts < 1) throw InputError("max_attempts must be at least 1");
        if (candidate_timestamps < 1) throw InputError("candidate_timestamps must be at least 1");
        if (!(recovery_oversample >= 1.0)) throw InputError("recovery_oversample must be at least 1");
    }
};

inline constexpr std::size_t kNoRemoval = std::numeric_limits<std::size_t>::max();

struct InsertedEdge {
    NodeId source = 0;
    NodeId target = 0;
    Timestamp timestamp = 0.0;
    /// Rank (position in RemovalPlan::removed) of the removal this edge replaces.
    std::size_t compensates = kNoRemoval;
    /// 0 for the first pass, r for the r-th recovery round.
    std::size_t round = 0;
    /// Chosen under the capacity slack C rather than an open deficit.
    bool relaxed = false;
};

struct SamplerRound {
    std::size_t round = 0;
    std::size_t timestamps_drawn = 0;
    std::size_t inserted = 0;
    bool refit = false;
};

/// Counts of candidate rejections, used to explain an infeasible run.
struct Rejections {
    std::size_t no_timestamp = 0; ///< source had no pooled timestamp in its activity window (C2/C3)
    std::size_t no_partner = 0;   ///< window held no other node (C3)
    std::size_t partition = 0;
    std::size_t capacity = 0;     ///< C4
    std::size_t novelty = 0;

    std::string dominant() const {
        const std::array<std::pair<std::size_t, const char*>, 5> all{{
            {no_timestamp, "activity window: no pooled timestamp where the source is active (C3)"},
            {no_partner, "activity window: no partner active near the timestamp (C3)"},
            {partition, "bipartite partition"},
            {capacity, "degree capacity (C4)"},
            {novelty, "novelty: every remaining partner already interacted"},
        }};
        const auto* best = &all[0];
        for (const auto& r : all)
            if (r.first > best->first) best = &r;
        return best->first == 0 ? "no eligible source node" : best->second;
    }
};

struct InsertionPlan {
    std::vector<InsertedEdge> inserted;
    std::size_t budget = 0;
    std::vector<SamplerRound> rounds;
    Rejections rejections;

    std::size_t recovery_rounds_used() const {
        std::size_t r = 0;
        for (const auto& e : inserted) r = std::max(r, e.round);
        return r;
    }
};

/// The sampler could not place every insertion. Carries the partial plan.
class InfeasibleSampling : public Error {
public:
    InfeasibleSampling(InsertionPlan partial, std::string diagnosis)
        : Error("negative sampling placed " + std::to_string(partial.inserted.size()) + " of " +
                std::to_string(partial.budget) + " edges; starved by " + diagnosis),
          partial_(std::move(partial)), diagnosis_(std::move(diagnosis)) {}

    const InsertionPlan& partial() const noexcept { return partial_; }
    const std::string& diagnosis() const noexcept { return diagnosis_; }

private:
    InsertionPlan partial_;
    std::string diagnosis_;
};

namespace detail {

inline std::uint64_t pair_key(NodeId a, NodeId b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

class TimestampSelector {
public:
    TimestampSelector(const TemporalGraph& train, const RemovalPlan& removal, const SamplerParams& params)
        : visible_(train.prefix(removal.visible)), params_(params), ledger_(visible_),
          activity_(visible_), rng_(params.rng_seed), stamp_(visible_.node_space(), 0),
          open_removals_(visible_.node_space()) {
        plan_.budget = removal.removed.size();
        for (std::size_t r = 0; r < removal.removed.size(); ++r) {
            const auto idx = removal.removed[r].index;
            if (idx >= visible_.edge_count()) throw InputError("removal plan references an edge outside the visible stream");
            const auto& e = visible_.edge(idx);
            ledger_.record_deletion(e.source, e.target);
            open_removals_[e.source].push_back(r);
        }
        for (auto& q : open_removals_) std::reverse(q.begin(), q.end());
        partners_.reserve(2 * visible_.edge_count());
        for (const auto& e : visible_.edges()) partners_.insert(pair_key(e.source, e.target));
    }

    InsertionPlan run() {
        if (plan_.budget == 0) return std::move(plan_);
        const auto kde = fit_kde(visible_.timestamps());
        refill_pool(kde, plan_.budget, 0, false);
        pass(false, 0);
        for (std::size_t round = 1; round <= params_.max_attempts && missing() > 0; ++round) {
            const auto want = static_cast<std::size_t>(std::ceil(static_cast<double>(missing()) * params_.recovery_oversample));
            refill_pool(refit_on_open_deficits(), want, round, true);
            pass(false, round);
            if (missing() > 0) pass(true, round);
        }
        if (missing() > 0) {
            auto diagnosis = plan_.rejections.dominant();
            throw InfeasibleSampling(std::move(plan_), std::move(diagnosis));
        }
        return std::move(plan_);
    }

private:
    std::size_t missing() const { return plan_.budget - plan_.inserted.size(); }

    std::int64_t out_deficit(NodeId v) const { return -ledger_.balance_out(v); }
    std::int64_t in_deficit(NodeId v) const { return -ledger_.balance_in(v); }

    bool source_eligible(NodeId v, bool relaxed) const {
        if (visible_.bipartite() && visible_.nodes().side(v) != Side::Source) return false;
        if (relaxed) return ledger_.balance_out(v) < static_cast<std::int64_t>(params_.node_capacity);
        return out_deficit(v) > 0;
    }

    bool target_eligible(NodeId w, bool relaxed) const {
        if (relaxed) return ledger_.balance_in(w) < static_cast<std::int64_t>(params_.node_capacity);
        return in_deficit(w) > 0;
    }

    void refill_pool(const KdeModel& kde, std::size_t count, std::size_t round, bool refit) {
        pool_.clear();
        for (auto t : kde.draw(rng_, count)) pool_.insert(t);
        plan_.rounds.push_back({round, count, 0, refit});
    }

    /// Re-fits the KDE on the activity of nodes whose deficit is still open.
    KdeModel refit_on_open_deficits() const {
        std::vector<Timestamp> times;
        for (NodeId v = 0; v < visible_.node_space(); ++v)
            if (out_deficit(v) > 0 || in_deficit(v) > 0)
                for (auto t : activity_.events(v)) times.push_back(t);
        if (times.empty()) return fit_kde(visible_.timestamps());
        return fit_kde(times);
    }

    /// Structural priority: largest outgoing deletion deficit first, then
    /// original degree, then node id.
    std::vector<NodeId> priority_order(bool relaxed) const {
        std::vector<NodeId> order;
        for (NodeId v = 0; v < visible_.node_space(); ++v)
            if (source_eligible(v, relaxed)) order.push_back(v);
        std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
            const auto da = out_deficit(a), db = out_deficit(b);
            if (da != db) return da > db;
            const auto ga = ledger_[a].original_out + ledger_[a].original_in;
            const auto gb = ledger_[b].original_out + ledger_[b].original_in;
            if (ga != gb) return ga > gb;
            return a < b;
        });
        return order;
    }

    struct Candidate {
        NodeId partner = 0;
        std::multiset<Timestamp>::iterator slot;
        std::int64_t deficit = 0;
        double distance = -1.0;
    };

    /// Candidate (partner, timestamp) pairs for v; returns the one whose
    /// partner's last activity before t is furthest from t.
    bool best_candidate(NodeId v, bool relaxed, Candidate& best) {
        const auto events = activity_.events(v);
        if (events.empty() || pool_.empty()) {
            ++plan_.rejections.no_timestamp;
            return false;
        }
        const double window = params_.window;
        std::vector<std::multiset<Timestamp>::iterator> slots;
        const auto start = static_cast<std::size_t>(rng_.index(events.size()));
        for (std::size_t step = 0; step < events.size() && slots.size() < params_.candidate_timestamps; ++step) {
            const auto e = events[(start + step) % events.size()];
            // Pooled timestamps t with e in [t - W, t].
            for (auto it = pool_.lower_bound(e);
                 it != pool_.end() && *it <= e + window && slots.size() < params_.candidate_timestamps; ++it)
                if (std::find(slots.begin(), slots.end(), it) == slots.end()) slots.push_back(it);
        }
        if (slots.empty()) {
            ++plan_.rejections.no_timestamp;
            return false;
        }

        bool found = false;
        for (auto slot : slots) {
            const Timestamp t = *slot;
            ++stamp_epoch_;
            const auto [first, last] = visible_.time_range(t - window, t);
            bool any_partner = false, any_opposite = false;
            for (auto i = first; i < last; ++i) {
                const auto& e = visible_.edge(i);
                for (const NodeId w : {e.source, e.target}) {
                    if (w == v || stamp_[w] == stamp_epoch_) continue;
                    stamp_[w] = stamp_epoch_;
                    any_partner = true;
                    if (visible_.bipartite() && visible_.nodes().side(w) != Side::Target) continue;
                    any_opposite = true;
                    if (!target_eligible(w, relaxed)) {
                        ++plan_.rejections.capacity;
                        continue;
                    }
                    if (partners_.count(pair_key(v, w))) {
                        ++plan_.rejections.novelty;
                        continue;
                    }
                    const auto deficit = in_deficit(w);
                    const double distance = t - activity_.last_at_or_before(w, t);
                    bool better = !found || deficit > best.deficit;
                    if (found && deficit == best.deficit)
                        better = distance > best.distance ||
                                 (distance == best.distance && (t < *best.slot || (t == *best.slot && w < best.partner)));
                    if (better) {
                        best = {w, slot, deficit, distance};
                        found = true;
                    }
                }
            }
            if (!any_partner) ++plan_.rejections.no_partner;
            else if (visible_.bipartite() && !any_opposite) ++plan_.rejections.partition;
        }
        return found;
    }

    void commit(NodeId v, const Candidate& c, std::size_t round, bool relaxed) {
        std::size_t compensates = kNoRemoval;
        if (!open_removals_[v].empty()) {
            compensates = open_removals_[v].back();
            open_removals_[v].pop_back();
        } else {
            while (fallback_cursor_ < open_removals_.size() && open_removals_[fallback_cursor_].empty()) ++fallback_cursor_;
            if (fallback_cursor_ < open_removals_.size()) {
                compensates = open_removals_[fallback_cursor_].back();
                open_removals_[fallback_cursor_].pop_back();
            }
        }
        plan_.inserted.push_back({v, c.partner, *c.slot, compensates, round, relaxed});
        ++plan_.rounds.back().inserted;
        ledger_.record_insertion(v, c.partner);
        partners_.insert(pair_key(v, c.partner));
        pool_.erase(c.slot);
    }

    void pass(bool relaxed, std::size_t round) {
        for (const NodeId v : priority_order(relaxed)) {
            while (missing() > 0 && source_eligible(v, relaxed)) {
                Candidate c;
                if (!best_candidate(v, relaxed, c)) break;
                commit(v, c, round, relaxed);
            }
            if (missing() == 0) return;
        }
    }

    TemporalGraph visible_;
    SamplerParams params_;
    DegreeLedger ledger_;
    ActivityIndex activity_;
    Rng rng_;
    std::unordered_set<std::uint64_t> partners_;
    std::multiset<Timestamp> pool_;
    std::vector<std::uint32_t> stamp_;
    std::uint32_t stamp_epoch_ = 0;
    std::vector<std::vector<std::size_t>> open_removals_;
    std::size_t fallback_cursor_ = 0;
    InsertionPlan plan_;
};

} // namespace detail

/// Replaces every removed edge with a novel, window-active, degree-balancing
/// edge at a KDE-drawn timestamp.
///
/// Source nodes are visited by structural priority. For each, candidate
/// timestamps come from a pool drawn from a KDE over the visible stream's
/// timestamps, restricted to times where the source is active in [t - W, t].
/// Partners must be active in the same window, never have interacted with the
/// source in either direction, sit on the target side for bipartite streams,
/// and have an open incoming deletion deficit. The partner whose latest
/// activity lies furthest before t wins.
///
/// If the pass falls short, each recovery round re-fits the KDE on the
/// activity of nodes that still have an open deficit and draws a fresh pool,
/// first matching open deficits only and then allowing up to
/// node_capacity extra insertions per node and direction.
inline InsertionPlan timestamp_selector(const TemporalGraph& train, const RemovalPlan& removal,
                                        const SamplerParams& params) {
    params.validate();
    return detail::TimestampSelector(train, removal, params).run();
}

/// G~ = (V, (E \ E') U E~). Inserted edges carry zero features and label 0
/// and follow existing edges that share their timestamp.
inline TemporalGraph insertion_positioning(const TemporalGraph& train, const RemovalPlan& removal,
                                           const InsertionPlan& insertion) {
    std::vector<bool> drop(train.edge_count(), false);
    for (const auto& r : removal.removed) {
        if (r.index >= train.edge_count()) throw InputError("removal plan does not match the training stream");
        if (drop[r.index]) throw InputError("removal plan lists an edge twice");
        drop[r.index] = true;
    }
    std::vector<TemporalEdge> kept;
    kept.reserve(train.edge_count() - removal.removed.size() + insertion.inserted.size());
    for (std::size_t i = 0; i < train.edge_count(); ++i)
        if (!drop[i]) kept.push_back(train.edge(i));

    std::vector<TemporalEdge> added;
    added.reserve(insertion.inserted.size());
    for (const auto& ins : insertion.inserted) {
        if (ins.source >= train.node_space() || ins.target >= train.node_space())
            throw InputError("insertion plan references an unknown node");
        TemporalEdge e;
        e.source = ins.source;
        e.target = ins.target;
        e.timestamp = ins.timestamp;
        e.features.assign(train.feature_count(), 0.0);
        added.push_back(std::move(e));
    }
    std::stable_sort(added.begin(), added.end(),
                     [](const TemporalEdge& a, const TemporalEdge& b) { return a.timestamp < b.timestamp; });
    std::vector<TemporalEdge> merged;
    merged.reserve(kept.size() + added.size());
    std::merge(std::make_move_iterator(kept.begin()), std::make_move_iterator(kept.end()),
               std::make_move_iterator(added.begin()), std::make_move_iterator(added.end()), std::back_inserter(merged),
               [](const TemporalEdge& a, const TemporalEdge& b) { return a.timestamp < b.timestamp; });
    return TemporalGraph(std::move(merged), train.node_table(), train.feature_count());
}

} // namespace tgp
