// SPDX-FileCopyrightText: (c) 2026 entro contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "entro/entropy.hpp"
#include "entro/stats.hpp"
#include "entro/types.hpp"

namespace entro {

/// Pruning rule: keep everything strictly below the p-th percentile of the
/// composite score, or keep the n lowest-scoring records.
struct CurationConfig {
    enum class Rule : std::uint8_t { percentile, lowest_count };

    Rule rule = Rule::percentile;
    double percentile = 50.0;  // p in (0, 100]
    std::size_t count = 0;     // n >= 1 for lowest_count

    static CurationConfig by_percentile(double p) { return {Rule::percentile, p, 0}; }
    static CurationConfig by_lowest_count(std::size_t n) { return {Rule::lowest_count, 0.0, n}; }
};

struct CurationResult {
    std::vector<std::string> kept;    // sorted by (composite, sample_id)
    std::vector<std::string> pruned;  // sorted by (composite, sample_id)
};

struct LevelPartition {
    std::vector<std::string> low;
    std::vector<std::string> mid;
    std::vector<std::string> high;
};

enum class BinScheme : std::uint8_t { equal_width, equal_count };

struct BinReport {
    std::vector<double> edges;        // num_bins + 1 ascending values
    std::vector<std::size_t> counts;  // per bin
    std::vector<double> accuracies;   // per bin; NaN for empty bins
    std::optional<double> trend;      // Spearman rho over nonempty bins; nullopt when undefined
    std::size_t labeled = 0;
};

/// Nearest-rank percentile: the ceil(p/100 * N)-th smallest value.
inline double percentile_threshold(std::span<const double> values, double p) {
    if (values.empty()) throw validation_error("percentile of an empty list");
    if (!(p > 0.0 && p <= 100.0))
        throw validation_error("percentile p=" + std::to_string(p) + " outside (0, 100]");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(sorted.size())));
    return sorted[std::min(rank, sorted.size()) - 1];
}

namespace detail {

// Indices of `records` ordered by the total order (composite, sample_id);
// the tie-break keeps every curation operation deterministic.
inline std::vector<std::size_t> sorted_indices(std::span<const EntropyRecord> records) {
    std::vector<std::size_t> idx(records.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (records[a].composite != records[b].composite) return records[a].composite < records[b].composite;
        return records[a].sample_id < records[b].sample_id;
    });
    return idx;
}

}  // namespace detail

/// Split records into (kept, pruned). The percentile rule keeps records with
/// composite strictly below the threshold; lowest_count keeps exactly n under
/// the (composite, sample_id) order. kept and pruned partition the input.
inline CurationResult curate(std::span<const EntropyRecord> records, const CurationConfig& config) {
    const auto order = detail::sorted_indices(records);
    CurationResult out;
    std::size_t boundary = 0;  // first pruned position in sorted order

    if (config.rule == CurationConfig::Rule::lowest_count) {
        if (config.count < 1) throw validation_error("lowest_count n must be >= 1");
        if (config.count > records.size())
            throw validation_error("lowest_count n=" + std::to_string(config.count) + " exceeds record count " +
                                   std::to_string(records.size()));
        boundary = config.count;
    } else {
        std::vector<double> composites(records.size());
        for (std::size_t i = 0; i < records.size(); ++i) composites[i] = records[i].composite;
        const double threshold = percentile_threshold(composites, config.percentile);
        while (boundary < order.size() && records[order[boundary]].composite < threshold) ++boundary;
    }

    out.kept.reserve(boundary);
    out.pruned.reserve(order.size() - boundary);
    for (std::size_t i = 0; i < order.size(); ++i) {
        (i < boundary ? out.kept : out.pruned).push_back(records[order[i]].sample_id);
    }
    return out;
}

/// Three disjoint subsets of equal size: the lowest-scoring, a window centered
/// on the median rank, and the highest-scoring. Requires N >= 3 * subset_size.
inline LevelPartition partition_levels(std::span<const EntropyRecord> records, std::size_t subset_size) {
    if (subset_size < 1) throw validation_error("subset_size must be >= 1");
    if (records.size() < 3 * subset_size)
        throw validation_error("partition_levels needs at least 3*subset_size=" + std::to_string(3 * subset_size) +
                               " records, got " + std::to_string(records.size()));
    const auto order = detail::sorted_indices(records);
    const std::size_t mid_start = (records.size() - subset_size) / 2;
    LevelPartition out;
    for (std::size_t i = 0; i < subset_size; ++i) {
        out.low.push_back(records[order[i]].sample_id);
        out.mid.push_back(records[order[mid_start + i]].sample_id);
        out.high.push_back(records[order[records.size() - subset_size + i]].sample_id);
    }
    return out;
}

/// Bin records by composite entropy and report per-bin accuracy of the
/// predicted labels, plus the Spearman trend between bin index and accuracy.
inline BinReport bin_accuracy(std::span<const EntropyRecord> records, std::span<const PreferenceSample> samples,
                              std::size_t num_bins, BinScheme scheme = BinScheme::equal_width) {
    if (num_bins < 2) throw validation_error("num_bins must be >= 2");
    if (records.empty()) throw validation_error("bin_accuracy: no records overlap the labeled samples");

    std::unordered_map<std::string, const PreferenceSample*> by_id;
    by_id.reserve(samples.size());
    for (const auto& s : samples) by_id.emplace(s.sample_id, &s);

    struct Joined {
        double composite;
        bool correct;
    };
    std::vector<Joined> joined;
    joined.reserve(records.size());
    for (const auto& rec : records) {
        const auto it = by_id.find(rec.sample_id);
        if (it == by_id.end())
            throw validation_error("no preference sample for sample_id=" + rec.sample_id);
        if (!it->second->predicted_label)
            throw validation_error("missing predicted_label for sample_id=" + rec.sample_id);
        joined.push_back({rec.composite, *it->second->predicted_label == it->second->label});
    }

    BinReport report;
    report.labeled = joined.size();
    report.counts.assign(num_bins, 0);
    std::vector<std::size_t> hits(num_bins, 0);
    report.edges.assign(num_bins + 1, 0.0);

    if (scheme == BinScheme::equal_width) {
        double lo = joined.front().composite, hi = lo;
        for (const auto& j : joined) {
            lo = std::min(lo, j.composite);
            hi = std::max(hi, j.composite);
        }
        const double width = (hi - lo) / static_cast<double>(num_bins);
        for (std::size_t b = 0; b <= num_bins; ++b) report.edges[b] = lo + width * static_cast<double>(b);
        report.edges[num_bins] = hi;
        for (const auto& j : joined) {
            std::size_t b = width > 0.0 ? static_cast<std::size_t>((j.composite - lo) / width) : 0;
            b = std::min(b, num_bins - 1);
            ++report.counts[b];
            hits[b] += j.correct ? 1 : 0;
        }
    } else {
        std::sort(joined.begin(), joined.end(),
                  [](const Joined& a, const Joined& b) { return a.composite < b.composite; });
        report.edges[0] = joined.front().composite;
        report.edges[num_bins] = joined.back().composite;
        for (std::size_t b = 0; b < num_bins; ++b) {
            const std::size_t first = b * joined.size() / num_bins;
            const std::size_t last = (b + 1) * joined.size() / num_bins;
            if (b > 0) report.edges[b] = first < joined.size() ? joined[first].composite : report.edges[num_bins];
            for (std::size_t i = first; i < last; ++i) {
                ++report.counts[b];
                hits[b] += joined[i].correct ? 1 : 0;
            }
        }
    }

    report.accuracies.assign(num_bins, std::numeric_limits<double>::quiet_NaN());
    std::vector<double> xs, ys;
    for (std::size_t b = 0; b < num_bins; ++b) {
        if (report.counts[b] == 0) continue;
        report.accuracies[b] = static_cast<double>(hits[b]) / static_cast<double>(report.counts[b]);
        xs.push_back(static_cast<double>(b));
        ys.push_back(report.accuracies[b]);
    }
    report.trend = stats::spearman_rho(xs, ys);
    return report;
}

}  // namespace entro
