#pragma once

// Agreement and correlation statistics over judge outputs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "cowrite/errors.hpp"

namespace cowrite::stats {

namespace detail {

inline void require_pairs(std::size_t a, std::size_t b, std::size_t min_len) {
    if (a != b) throw LengthMismatchError("inputs differ in length: " + std::to_string(a) + " vs " + std::to_string(b));
    if (a < min_len) throw DomainError("need at least " + std::to_string(min_len) + " observations");
}

inline double mean(const std::vector<double>& xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

}  // namespace detail

inline double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
    detail::require_pairs(xs.size(), ys.size(), 2);
    const double mx = detail::mean(xs), my = detail::mean(ys);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx, dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0 || syy == 0) throw UndefinedCorrelationError("correlation undefined for constant input");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// 1-based ranks; tied values share the mean of the ranks they span.
inline std::vector<double> average_ranks(const std::vector<double>& xs) {
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(xs.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

inline double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
    detail::require_pairs(xs.size(), ys.size(), 2);
    return pearson(average_ranks(xs), average_ranks(ys));
}

struct Kappa {
    double kappa = 0.0;
    double observed = 0.0;  // p_o
    double expected = 0.0;  // p_e
    bool degenerate = false;  // p_e == 1; kappa reported as 0
};

inline Kappa cohen_kappa(const std::vector<bool>& a, const std::vector<bool>& b) {
    detail::require_pairs(a.size(), b.size(), 1);
    const double n = static_cast<double>(a.size());
    std::size_t agree = 0, a_yes = 0, b_yes = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        agree += a[i] == b[i];
        a_yes += a[i];
        b_yes += b[i];
    }
    // Integer form of (p_o - p_e) / (1 - p_e): one rounding, in the final division.
    const auto N = static_cast<long long>(a.size());
    const long long chance = static_cast<long long>(a_yes) * static_cast<long long>(b_yes) +
                             (N - static_cast<long long>(a_yes)) * (N - static_cast<long long>(b_yes));
    Kappa k;
    k.observed = static_cast<double>(agree) / n;
    k.expected = static_cast<double>(chance) / (n * n);
    if (chance == N * N) {
        k.degenerate = true;
        return k;
    }
    k.kappa = static_cast<double>(N * static_cast<long long>(agree) - chance) / static_cast<double>(N * N - chance);
    return k;
}

/// Linear interpolation between order statistics (Hyndman-Fan type 7).
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw DomainError("quantile of an empty sample");
    const double h = (static_cast<double>(sorted.size()) - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct DeltaCI {
    double delta = 0.0;  // mean of b - a
    double lo = 0.0;
    double hi = 0.0;
    std::size_t n = 0;
    std::size_t resamples = 0;
    double level = 0.0;
    std::uint64_t seed = 0;
};

/// Percentile bootstrap of the mean paired difference b - a. Indices are drawn
/// as mt19937_64() % n so results do not depend on the standard library.
inline DeltaCI bootstrap_delta_ci(const std::vector<std::pair<double, double>>& paired, std::size_t resamples = 1000,
                                  double level = 0.95, std::uint64_t seed = 42) {
    if (paired.empty()) throw DomainError("bootstrap needs at least one pair");
    if (resamples == 0) throw DomainError("bootstrap needs at least one resample");
    if (!(level > 0 && level < 1)) throw DomainError("confidence level must be in (0, 1)");
    std::vector<double> diffs;
    diffs.reserve(paired.size());
    for (const auto& [a, b] : paired) diffs.push_back(b - a);
    const std::size_t n = diffs.size();

    std::mt19937_64 rng(seed);
    std::vector<double> means;
    means.reserve(resamples);
    for (std::size_t r = 0; r < resamples; ++r) {
        double sum = 0;
        for (std::size_t i = 0; i < n; ++i) sum += diffs[rng() % n];
        means.push_back(sum / static_cast<double>(n));
    }
    std::sort(means.begin(), means.end());
    const double tail = (1 - level) / 2;
    return {detail::mean(diffs), quantile_sorted(means, tail), quantile_sorted(means, 1 - tail), n, resamples, level,
            seed};
}

}  // namespace cowrite::stats
