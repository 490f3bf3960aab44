// SPDX-FileCopyrightText: (c) 2026 entro contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace entro::stats {

inline double mean(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("mean of empty range");
    long double acc = 0.0L;
    for (double x : v) acc += x;
    return static_cast<double>(acc / v.size());
}

// sample standard deviation (ddof = 1); 0 for fewer than two values
inline double sample_stddev(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    long double acc = 0.0L;
    for (double x : v) acc += (x - m) * (x - m);
    return std::sqrt(static_cast<double>(acc / (v.size() - 1)));
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Average ranks (1-based), ties share the mean of their rank block.
inline std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
        i = j + 1;
    }
    return ranks;
}

// Spearman rank correlation with average-rank tie handling. Returns nullopt
// when either series is constant (correlation undefined).
inline std::optional<double> spearman_rho(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("spearman_rho: size mismatch");
    if (x.size() < 2) return std::nullopt;
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const double mx = mean(rx), my = mean(ry);
    long double sxy = 0.0L, sxx = 0.0L, syy = 0.0L;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        const double dx = rx[i] - mx, dy = ry[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0L || syy <= 0.0L) return std::nullopt;
    return static_cast<double>(sxy / std::sqrt(static_cast<double>(sxx) * static_cast<double>(syy)));
}

// One-sided Welch test (H1: mean(a) > mean(b)); normal approximation of the
// p-value, adequate for the large per-seed sample counts used here.
inline double welch_one_sided_p(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("welch_one_sided_p: need >= 2 values per group");
    const double ma = mean(a), mb = mean(b);
    const double va = sample_stddev(a) * sample_stddev(a);
    const double vb = sample_stddev(b) * sample_stddev(b);
    const double se = std::sqrt(va / a.size() + vb / b.size());
    if (se == 0.0) return ma > mb ? 0.0 : 1.0;
    return 1.0 - normal_cdf((ma - mb) / se);
}

struct PairedDiff {
    double mean_diff = 0.0;
    double se_diff = 0.0;  // sd of per-pair differences / sqrt(n)
};

inline PairedDiff paired_difference(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty()) throw std::invalid_argument("paired_difference: bad sizes");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    PairedDiff out;
    out.mean_diff = mean(d);
    out.se_diff = sample_stddev(d) / std::sqrt(static_cast<double>(d.size()));
    return out;
}

}  // namespace entro::stats
