// SPDX-FileCopyrightText: (c) 2026 entro contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Independent test oracles. These deliberately use plain double arithmetic
// and straightforward loops so they share no code path with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

// -sum p ln p over the normalized outcome masses, 0 ln 0 := 0
inline double naive_entropy(std::vector<double> masses) {
    double total = 0.0;
    for (double m : masses) total += m;
    double h = 0.0;
    for (double m : masses) {
        const double p = m / total;
        if (p > 0.0) h -= p * std::log(p);
    }
    return h;
}

// nearest-rank percentile: ceil(p/100 * N)-th smallest
inline double naive_percentile(std::vector<double> values, double p) {
    std::sort(values.begin(), values.end());
    const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(values.size())));
    return values[rank - 1];
}

inline double naive_mean(const std::vector<double>& values) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc / static_cast<double>(values.size());
}

}  // namespace oracle
