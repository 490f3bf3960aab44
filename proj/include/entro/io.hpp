// SPDX-FileCopyrightText: (c) 2026 entro contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "entro/entropy.hpp"
#include "entro/types.hpp"

// JSONL wire formats. One object per line, UTF-8, unknown fields ignored.
// Loaders are total: a line either becomes a validated record or raises an
// error naming the file, line and (where known) sample_id.

namespace entro::io {

namespace detail {

inline nlohmann::json parse_line(const std::string& line, const std::filesystem::path& path, std::size_t lineno) {
    try {
        return nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(path.string() + ":" + std::to_string(lineno) + ": malformed JSON: " + e.what());
    }
}

template <class T>
T require(const nlohmann::json& obj, const char* field, const std::filesystem::path& path, std::size_t lineno) {
    const auto it = obj.find(field);
    if (it == obj.end())
        throw parse_error(path.string() + ":" + std::to_string(lineno) + ": missing required field '" + field + "'");
    try {
        return it->get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(path.string() + ":" + std::to_string(lineno) + ": field '" + field + "': " + e.what());
    }
}

template <class Fn>
void for_each_line(const std::filesystem::path& path, Fn&& fn) {
    std::ifstream in(path);
    if (!in) throw error("cannot open " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        fn(line, lineno);
    }
}

class UniqueIds {
public:
    void check(const std::string& id, const std::filesystem::path& path, std::size_t lineno) {
        if (!seen_.insert(id).second)
            throw validation_error(path.string() + ":" + std::to_string(lineno) + ": duplicate sample_id=" + id);
    }

private:
    std::unordered_set<std::string> seen_;
};

}  // namespace detail

inline TokenDistribution distribution_from_json(const nlohmann::json& obj, const VocabSpec& vocab,
                                                const std::filesystem::path& path, std::size_t lineno) {
    TokenDistribution d;
    d.vocab = vocab;
    const auto kind = detail::require<std::string>(obj, "kind", path, lineno);
    if (kind == "dense") d.kind = DistributionKind::dense;
    else if (kind == "topk") d.kind = DistributionKind::topk;
    else
        throw parse_error(path.string() + ":" + std::to_string(lineno) + ": distribution kind '" + kind +
                          "' (expected dense|topk)");
    const auto pairs = detail::require<nlohmann::json>(obj, "probs", path, lineno);
    for (const auto& pair : pairs) {
        if (!pair.is_array() || pair.size() != 2)
            throw parse_error(path.string() + ":" + std::to_string(lineno) + ": probs entries must be [id, p] pairs");
        d.probs.emplace_back(pair[0].get<std::uint32_t>(), pair[1].get<double>());
    }
    d.tail_mass = obj.value("tail_mass", 0.0);
    return d;
}

inline nlohmann::ordered_json distribution_to_json(const TokenDistribution& d) {
    nlohmann::ordered_json obj;
    obj["kind"] = d.kind == DistributionKind::dense ? "dense" : "topk";
    auto& pairs = obj["probs"] = nlohmann::ordered_json::array();
    for (const auto& [id, p] : d.probs) pairs.push_back({id, p});
    if (d.kind == DistributionKind::topk) obj["tail_mass"] = d.tail_mass;
    return obj;
}

inline std::vector<ResponseTrace> load_traces(const std::filesystem::path& path, const VocabSpec& vocab) {
    vocab.validate();
    std::vector<ResponseTrace> traces;
    detail::UniqueIds ids;
    detail::for_each_line(path, [&](const std::string& line, std::size_t lineno) {
        const auto obj = detail::parse_line(line, path, lineno);
        ResponseTrace t;
        t.sample_id = detail::require<std::string>(obj, "sample_id", path, lineno);
        ids.check(t.sample_id, path, lineno);
        t.tokens = detail::require<std::vector<std::uint32_t>>(obj, "tokens", path, lineno);
        t.raw_text = detail::require<std::string>(obj, "raw_text", path, lineno);
        t.answer_position = detail::require<std::size_t>(obj, "answer_position", path, lineno);
        const auto span = detail::require<std::vector<std::size_t>>(obj, "reasoning_span", path, lineno);
        if (span.size() != 2)
            throw parse_error(path.string() + ":" + std::to_string(lineno) + ": reasoning_span must be [start, end)");
        t.reasoning_span = {span[0], span[1]};
        const auto dists = detail::require<nlohmann::json>(obj, "distributions", path, lineno);
        for (const auto& d : dists) t.distributions.push_back(distribution_from_json(d, vocab, path, lineno));
        if (const auto it = obj.find("meta"); it != obj.end() && !it->is_null()) t.meta = it->dump();
        t.validate();
        traces.push_back(std::move(t));
    });
    return traces;
}

inline nlohmann::ordered_json trace_to_json(const ResponseTrace& t) {
    nlohmann::ordered_json obj;
    obj["sample_id"] = t.sample_id;
    obj["tokens"] = t.tokens;
    obj["raw_text"] = t.raw_text;
    obj["answer_position"] = t.answer_position;
    obj["reasoning_span"] = {t.reasoning_span.first, t.reasoning_span.second};
    auto& dists = obj["distributions"] = nlohmann::ordered_json::array();
    for (const auto& d : t.distributions) dists.push_back(distribution_to_json(d));
    if (t.meta) obj["meta"] = nlohmann::ordered_json::parse(*t.meta);
    return obj;
}

inline std::vector<PreferenceSample> load_preferences(const std::filesystem::path& path) {
    std::vector<PreferenceSample> samples;
    detail::UniqueIds ids;
    detail::for_each_line(path, [&](const std::string& line, std::size_t lineno) {
        const auto obj = detail::parse_line(line, path, lineno);
        PreferenceSample s;
        s.sample_id = detail::require<std::string>(obj, "sample_id", path, lineno);
        ids.check(s.sample_id, path, lineno);
        s.image_ref = detail::require<std::string>(obj, "image_ref", path, lineno);
        s.query = detail::require<std::string>(obj, "query", path, lineno);
        s.response_a = detail::require<std::string>(obj, "response_a", path, lineno);
        s.response_b = detail::require<std::string>(obj, "response_b", path, lineno);
        const std::string where = path.string() + ":" + std::to_string(lineno) + " sample_id=" + s.sample_id;
        s.label = choice_from_string(detail::require<std::string>(obj, "label", path, lineno), where);
        if (const auto it = obj.find("predicted_label"); it != obj.end() && !it->is_null())
            s.predicted_label = choice_from_string(it->get<std::string>(), where);
        samples.push_back(std::move(s));
    });
    return samples;
}

inline nlohmann::ordered_json preference_to_json(const PreferenceSample& s) {
    nlohmann::ordered_json obj;
    obj["sample_id"] = s.sample_id;
    obj["image_ref"] = s.image_ref;
    obj["query"] = s.query;
    obj["response_a"] = s.response_a;
    obj["response_b"] = s.response_b;
    obj["label"] = std::string(1, choice_letter(s.label));
    if (s.predicted_label) obj["predicted_label"] = std::string(1, choice_letter(*s.predicted_label));
    return obj;
}

// Entropy record lines are read leniently: sample_id and composite are
// required, everything else defaults. This lets kept.jsonl / pruned.jsonl
// feed straight into downstream subcommands.
inline std::vector<EntropyRecord> load_records(const std::filesystem::path& path) {
    std::vector<EntropyRecord> records;
    detail::UniqueIds ids;
    detail::for_each_line(path, [&](const std::string& line, std::size_t lineno) {
        const auto obj = detail::parse_line(line, path, lineno);
        EntropyRecord rec;
        rec.sample_id = detail::require<std::string>(obj, "sample_id", path, lineno);
        ids.check(rec.sample_id, path, lineno);
        rec.composite = detail::require<double>(obj, "composite", path, lineno);
        rec.answer_entropy = obj.value("answer_entropy", rec.composite);
        rec.sentence_entropy = obj.value("sentence_entropy", 0.0);
        if (obj.contains("mode")) rec.mode = score_mode_from_string(obj.at("mode").get<std::string>());
        if (obj.contains("tail_mode")) rec.tail_mode = tail_mode_from_string(obj.at("tail_mode").get<std::string>());
        records.push_back(std::move(rec));
    });
    return records;
}

inline nlohmann::ordered_json record_to_json(const EntropyRecord& rec) {
    nlohmann::ordered_json obj;
    obj["sample_id"] = rec.sample_id;
    obj["answer_entropy"] = rec.answer_entropy;
    obj["sentence_entropy"] = rec.sentence_entropy;
    obj["composite"] = rec.composite;
    obj["mode"] = to_string(rec.mode);
    obj["tail_mode"] = to_string(rec.tail_mode);
    return obj;
}

template <class T, class Fn>
void write_jsonl(const std::filesystem::path& path, std::span<const T> items, Fn&& to_json) {
    std::ofstream out(path);
    if (!out) throw error("cannot open " + path.string() + " for writing");
    for (const auto& item : items) out << to_json(item).dump() << "\n";
    if (!out) throw error("write failed for " + path.string());
}

inline void write_traces(const std::filesystem::path& path, std::span<const ResponseTrace> traces) {
    write_jsonl(path, traces, [](const ResponseTrace& t) { return trace_to_json(t); });
}

inline void write_preferences(const std::filesystem::path& path, std::span<const PreferenceSample> samples) {
    write_jsonl(path, samples, [](const PreferenceSample& s) { return preference_to_json(s); });
}

inline void write_records(const std::filesystem::path& path, std::span<const EntropyRecord> records) {
    write_jsonl(path, records, [](const EntropyRecord& r) { return record_to_json(r); });
}

// kept.jsonl / pruned.jsonl: sample_id plus the composite it was ranked by.
inline void write_selection(const std::filesystem::path& path, std::span<const std::pair<std::string, double>> rows) {
    write_jsonl(path, rows, [](const std::pair<std::string, double>& row) {
        nlohmann::ordered_json obj;
        obj["sample_id"] = row.first;
        obj["composite"] = row.second;
        return obj;
    });
}

}  // namespace entro::io
