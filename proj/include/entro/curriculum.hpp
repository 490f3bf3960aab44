// SPDX-FileCopyrightText: (c) 2026 entro contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "entro/curation.hpp"
#include "entro/entropy.hpp"
#include "entro/rng.hpp"
#include "entro/types.hpp"

namespace entro {

enum class ScheduleMode : std::uint8_t { ascending, random };

/// Deterministic training order: per epoch, a list of batches of sample ids.
/// Each epoch's concatenated batches are a permutation of the input ids.
struct CurriculumSchedule {
    std::size_t epochs = 1;
    std::size_t batch_size = 1;
    ScheduleMode mode = ScheduleMode::ascending;
    std::uint64_t seed = 0;
    std::vector<std::vector<std::vector<std::string>>> order;  // [epoch][batch][i]

    // Equality is over the training-relevant content; mode/seed/batch_size
    // are construction inputs and are re-derivable or not serialized.
    friend bool operator==(const CurriculumSchedule& a, const CurriculumSchedule& b) {
        return a.epochs == b.epochs && a.order == b.order;
    }
};

/// Build the per-epoch batch order. Ascending mode reuses one fixed order
/// sorted by (composite, sample_id); random mode draws an independent
/// seeded permutation per epoch from (seed, epoch).
inline CurriculumSchedule build_schedule(std::span<const EntropyRecord> records, std::size_t epochs,
                                         std::size_t batch_size, ScheduleMode mode, std::uint64_t seed = 0) {
    if (records.empty()) throw validation_error("build_schedule: no records");
    if (epochs < 1) throw validation_error("build_schedule: epochs must be >= 1");
    if (batch_size < 1) throw validation_error("build_schedule: batch_size must be >= 1");

    const auto sorted = detail::sorted_indices(records);
    std::vector<std::string> base;
    base.reserve(records.size());
    for (std::size_t i : sorted) base.push_back(records[i].sample_id);

    CurriculumSchedule schedule;
    schedule.epochs = epochs;
    schedule.batch_size = batch_size;
    schedule.mode = mode;
    schedule.seed = seed;
    schedule.order.resize(epochs);

    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        std::vector<std::string> ids = base;
        if (mode == ScheduleMode::random) {
            Rng rng(mix_seed(seed, epoch));
            rng.shuffle(ids);
        }
        auto& batches = schedule.order[epoch];
        for (std::size_t start = 0; start < ids.size(); start += batch_size) {
            const std::size_t stop = std::min(start + batch_size, ids.size());
            batches.emplace_back(ids.begin() + static_cast<std::ptrdiff_t>(start),
                                 ids.begin() + static_cast<std::ptrdiff_t>(stop));
        }
    }
    return schedule;
}

/// One JSONL line per batch: {"epoch": e, "batch": b, "sample_ids": [...]}.
inline void emit_schedule(const CurriculumSchedule& schedule, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw error("cannot open " + path.string() + " for writing");
    for (std::size_t e = 0; e < schedule.order.size(); ++e) {
        for (std::size_t b = 0; b < schedule.order[e].size(); ++b) {
            nlohmann::ordered_json line;
            line["epoch"] = e;
            line["batch"] = b;
            line["sample_ids"] = schedule.order[e][b];
            out << line.dump() << "\n";
        }
    }
    if (!out) throw error("write failed for " + path.string());
}

inline CurriculumSchedule load_schedule(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw error("cannot open " + path.string());
    CurriculumSchedule schedule;
    schedule.order.clear();
    schedule.epochs = 0;
    schedule.batch_size = 1;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw parse_error(path.string() + ":" + std::to_string(lineno) + ": malformed JSON: " + e.what());
        }
        const auto epoch = obj.at("epoch").get<std::size_t>();
        const auto batch = obj.at("batch").get<std::size_t>();
        if (epoch >= schedule.order.size()) schedule.order.resize(epoch + 1);
        if (batch != schedule.order[epoch].size())
            throw parse_error(path.string() + ":" + std::to_string(lineno) + ": batch index " +
                              std::to_string(batch) + " out of order");
        auto ids = obj.at("sample_ids").get<std::vector<std::string>>();
        schedule.batch_size = std::max(schedule.batch_size, ids.size());
        schedule.order[epoch].push_back(std::move(ids));
    }
    schedule.epochs = schedule.order.size();
    if (schedule.epochs == 0) throw parse_error(path.string() + ": empty schedule");
    return schedule;
}

inline const char* to_string(ScheduleMode m) { return m == ScheduleMode::ascending ? "ascending" : "random"; }

inline ScheduleMode schedule_mode_from_string(const std::string& s) {
    if (s == "ascending") return ScheduleMode::ascending;
    if (s == "random") return ScheduleMode::random;
    throw config_error("unknown schedule mode '" + s + "' (expected ascending|random)");
}

}  // namespace entro
