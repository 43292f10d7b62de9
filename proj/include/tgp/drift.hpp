#pragma once

#include <algorithm>
#include <cmath>
#include <iterator>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tgp/error.hpp"
#include "tgp/graph.hpp"

namespace tgp {

enum class DriftKind { MSS, MSS2, Cosine, JaccardTopK, Euclidean, JSD, KL, Chebyshev, Wasserstein };

inline constexpr DriftKind kAllDriftKinds[] = {DriftKind::MSS,       DriftKind::MSS2,      DriftKind::Cosine,
                                               DriftKind::JaccardTopK, DriftKind::Euclidean, DriftKind::JSD,
                                               DriftKind::KL,        DriftKind::Chebyshev, DriftKind::Wasserstein};

inline std::string_view to_string(DriftKind kind) {
    switch (kind) {
    case DriftKind::MSS: return "MSS";
    case DriftKind::MSS2: return "MSS2";
    case DriftKind::Cosine: return "Cosine";
    case DriftKind::JaccardTopK: return "Jaccard";
    case DriftKind::Euclidean: return "Euclidean";
    case DriftKind::JSD: return "JSD";
    case DriftKind::KL: return "KL";
    case DriftKind::Chebyshev: return "Chebyshev";
    case DriftKind::Wasserstein: return "Wasserstein";
    }
    return "?";
}

inline std::optional<DriftKind> drift_kind_from_string(std::string_view name) {
    for (auto k : kAllDriftKinds)
        if (to_string(k) == name) return k;
    if (name == "MSS²" || name == "MSS^2") return DriftKind::MSS2;
    if (name == "JaccardTopK") return DriftKind::JaccardTopK;
    return std::nullopt;
}

struct DriftMetric {
    DriftKind kind = DriftKind::Cosine;
    /// JaccardTopK only; 0 selects max(1, ceil(0.1 * |V|)).
    std::size_t topk = 0;
    /// KL only: added to the denominator.
    double epsilon = 1e-12;

    void validate() const {
        if (!(epsilon > 0.0)) throw InputError("KL epsilon must be positive");
    }

    std::size_t effective_topk(std::size_t n) const {
        if (topk > 0) return topk;
        return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(n))));
    }

    /// MSS2 compares means, which normalization fixes at 1/|V|, so it reads raw snapshots.
    bool wants_raw_snapshots() const noexcept { return kind == DriftKind::MSS2; }
};

/// Indices of the k largest entries; ties go to the lower index.
inline std::vector<std::size_t> binarize_topk(std::span<const double> v, std::size_t k) {
    if (k == 0) throw InputError("top-k requires k >= 1");
    if (k > v.size()) {
        warn("top-k larger than the vector; returning every index");
        k = v.size();
    }
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                      [&](std::size_t a, std::size_t b) { return v[a] > v[b] || (v[a] == v[b] && a < b); });
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

namespace detail {

inline double sum_of(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

inline bool all_zero(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

inline std::vector<double> to_distribution(std::span<const double> v) {
    const double total = sum_of(v);
    std::vector<double> out(v.begin(), v.end());
    for (auto& x : out) x /= total;
    return out;
}

/// sum p_i log(p_i / (q_i + eps)), with 0 log 0 = 0.
inline double kl_term(std::span<const double> p, std::span<const double> q, double eps) {
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > 0.0) acc += p[i] * std::log(p[i] / (q[i] + eps));
    return acc;
}

} // namespace detail

/// Distance between consecutive score vectors.
///
/// Cosine, Euclidean, Chebyshev, MSS and MSS2 use the vectors as given. KL,
/// JSD and Wasserstein first rescale both vectors to probability
/// distributions. Wasserstein is the 1-d transport cost on the node-index
/// line with unit spacing: sum_i |F_prev(i) - F_curr(i)|.
inline double drift(std::span<const double> prev, std::span<const double> curr, const DriftMetric& metric) {
    metric.validate();
    if (prev.size() != curr.size()) throw InputError("drift: vector length mismatch");
    const auto n = prev.size();
    if (n == 0) return 0.0;

    switch (metric.kind) {
    case DriftKind::MSS: {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += std::abs(curr[i] - prev[i]);
        return acc / static_cast<double>(n);
    }
    case DriftKind::MSS2:
        return std::abs(detail::sum_of(curr) / static_cast<double>(n) - detail::sum_of(prev) / static_cast<double>(n));
    case DriftKind::Euclidean: {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += (curr[i] - prev[i]) * (curr[i] - prev[i]);
        return std::sqrt(acc);
    }
    case DriftKind::Chebyshev: {
        double best = 0.0;
        for (std::size_t i = 0; i < n; ++i) best = std::max(best, std::abs(curr[i] - prev[i]));
        return best;
    }
    case DriftKind::Cosine: {
        double dot = 0.0, np = 0.0, nc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            dot += prev[i] * curr[i];
            np += prev[i] * prev[i];
            nc += curr[i] * curr[i];
        }
        if (np == 0.0 && nc == 0.0) return 0.0;
        // A zero vector shares no direction with anything.
        if (np == 0.0 || nc == 0.0) return 1.0;
        const double sim = dot / (std::sqrt(np) * std::sqrt(nc));
        return std::clamp(1.0 - sim, 0.0, 2.0);
    }
    case DriftKind::JaccardTopK: {
        const auto k = metric.effective_topk(n);
        const auto a = binarize_topk(prev, k);
        const auto b = binarize_topk(curr, k);
        std::vector<std::size_t> common;
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
        const double inter = static_cast<double>(common.size());
        const double uni = static_cast<double>(a.size() + b.size()) - inter;
        return uni == 0.0 ? 0.0 : 1.0 - inter / uni;
    }
    case DriftKind::KL:
    case DriftKind::JSD:
    case DriftKind::Wasserstein: {
        const bool zp = detail::all_zero(prev);
        const bool zc = detail::all_zero(curr);
        if (zp && zc) return 0.0;
        if (zp || zc) throw InputError(std::string("drift: ") + std::string(to_string(metric.kind)) +
                                       " is undefined for exactly one all-zero vector");
        const auto p = detail::to_distribution(prev);
        const auto q = detail::to_distribution(curr);
        if (metric.kind == DriftKind::KL) return std::max(0.0, detail::kl_term(p, q, metric.epsilon));
        if (metric.kind == DriftKind::JSD) {
            std::vector<double> mid(n);
            for (std::size_t i = 0; i < n; ++i) mid[i] = 0.5 * (p[i] + q[i]);
            const double d = 0.5 * detail::kl_term(p, mid, 0.0) + 0.5 * detail::kl_term(q, mid, 0.0);
            return std::clamp(d, 0.0, std::log(2.0));
        }
        double cdf_gap = 0.0, acc = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            cdf_gap += p[i] - q[i];
            acc += std::abs(cdf_gap);
        }
        return acc;
    }
    }
    return 0.0;
}

} // namespace tgp
