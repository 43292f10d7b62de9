#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "tgp/error.hpp"
#include "tgp/graph.hpp"
#include "tgp/rng.hpp"

namespace tgp {

/// Gaussian kernel density over timestamps, sampled by picking a data point
/// and adding bandwidth-scaled noise. Draws are clamped into [min, max].
class KdeModel {
public:
    KdeModel(std::vector<Timestamp> sample, double bandwidth)
        : sample_(std::move(sample)), bandwidth_(bandwidth) {
        if (sample_.empty()) throw InputError("KDE needs at least one timestamp");
        if (!(bandwidth_ > 0.0)) throw InputError("KDE bandwidth must be positive");
        std::sort(sample_.begin(), sample_.end());
    }

    double bandwidth() const noexcept { return bandwidth_; }
    Timestamp min() const noexcept { return sample_.front(); }
    Timestamp max() const noexcept { return sample_.back(); }
    std::span<const Timestamp> sample() const noexcept { return sample_; }

    Timestamp draw(Rng& rng) const {
        const auto centre = sample_[rng.index(sample_.size())];
        return std::clamp(centre + bandwidth_ * rng.normal(), min(), max());
    }

    std::vector<Timestamp> draw(Rng& rng, std::size_t count) const {
        std::vector<Timestamp> out(count);
        for (auto& t : out) t = draw(rng);
        return out;
    }

private:
    std::vector<Timestamp> sample_;
    double bandwidth_;
};

/// Scott's rule, h = stddev * n^(-1/5), floored at 1e-6 * range (or 1e-9
/// for a constant sample).
inline KdeModel fit_kde(std::span<const Timestamp> timestamps) {
    if (timestamps.empty()) throw InputError("cannot fit a KDE to an empty sample");
    const auto n = static_cast<double>(timestamps.size());
    double mean = 0.0;
    for (auto t : timestamps) mean += t;
    mean /= n;
    double var = 0.0;
    for (auto t : timestamps) var += (t - mean) * (t - mean);
    var = timestamps.size() > 1 ? var / (n - 1.0) : 0.0;
    const auto [lo, hi] = std::minmax_element(timestamps.begin(), timestamps.end());
    double h = std::sqrt(var) * std::pow(n, -0.2);
    h = std::max({h, 1e-6 * (*hi - *lo), 1e-9});
    return KdeModel(std::vector<Timestamp>(timestamps.begin(), timestamps.end()), h);
}

} // namespace tgp
