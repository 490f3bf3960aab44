// SPDX-FileCopyrightText: (c) 2026 entro contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace entro {

namespace detail {

inline std::string short_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

}  // namespace detail

// Base error for all domain failures; messages carry file/line/sample_id
// context so callers can surface them verbatim.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A record or field violated a documented invariant.
struct validation_error : error {
    using error::error;
};

// A file or line could not be decoded at all.
struct parse_error : error {
    using error::error;
};

// A configuration value (file or flag) is unusable.
struct config_error : error {
    using error::error;
};

/// Preference verdict: which of the two candidate responses is preferred.
enum class Choice : std::uint8_t { A, B };

inline Choice other(Choice c) { return c == Choice::A ? Choice::B : Choice::A; }
inline char choice_letter(Choice c) { return c == Choice::A ? 'A' : 'B'; }

inline Choice choice_from_string(const std::string& s, const std::string& context) {
    if (s == "A") return Choice::A;
    if (s == "B") return Choice::B;
    throw validation_error("label '" + s + "' outside {A, B} at " + context);
}

/// Vocabulary description shared by every distribution of a trace file.
struct VocabSpec {
    std::uint32_t size = 2;

    void validate() const {
        if (size < 2) throw validation_error("vocab size must be >= 2, got " + std::to_string(size));
    }
};

enum class DistributionKind : std::uint8_t { dense, topk };

// Probability mass over the vocabulary at one generation position. Dense
// distributions list every token; topk lists a subset and carries the
// remaining mass in tail_mass.
struct TokenDistribution {
    DistributionKind kind = DistributionKind::dense;
    std::vector<std::pair<std::uint32_t, double>> probs;  // (token_id, probability)
    double tail_mass = 0.0;                               // topk only
    VocabSpec vocab;

    // Input mass may be off by at most this much; computations renormalize.
    static constexpr double kMassTolerance = 1e-9;

    void validate(const std::string& context) const;
};

inline void TokenDistribution::validate(const std::string& context) const {
    vocab.validate();
    if (probs.size() > vocab.size)
        throw validation_error("distribution lists " + std::to_string(probs.size()) + " tokens but vocab size is " +
                               std::to_string(vocab.size) + " at " + context);
    std::vector<bool> seen(vocab.size, false);
    long double mass = 0.0L;
    for (const auto& [id, p] : probs) {
        if (id >= vocab.size)
            throw validation_error("token id " + std::to_string(id) + " >= vocab size " + std::to_string(vocab.size) +
                                   " at " + context);
        if (seen[id]) throw validation_error("duplicate token id " + std::to_string(id) + " at " + context);
        seen[id] = true;
        if (!(p >= 0.0 && p <= 1.0))
            throw validation_error("probability " + detail::short_number(p) + " outside [0,1] at " + context);
        mass += p;
    }
    if (kind == DistributionKind::dense) {
        if (probs.size() != vocab.size)
            throw validation_error("dense distribution covers " + std::to_string(probs.size()) + " of " +
                                   std::to_string(vocab.size) + " tokens at " + context);
        if (std::abs(static_cast<double>(mass) - 1.0) > kMassTolerance)
            throw validation_error("distribution mass " + detail::short_number(static_cast<double>(mass)) +
                                   " != 1 at " + context);
    } else {
        if (!(tail_mass >= 0.0 && tail_mass <= 1.0))
            throw validation_error("tail_mass " + detail::short_number(tail_mass) + " outside [0,1] at " + context);
        if (std::abs(static_cast<double>(mass) + tail_mass - 1.0) > kMassTolerance)
            throw validation_error("distribution mass " +
                                   detail::short_number(static_cast<double>(mass) + tail_mass) + " != 1 at " +
                                   context);
    }
}

// One generated structured response with per-position output distributions.
struct ResponseTrace {
    std::string sample_id;
    std::vector<std::uint32_t> tokens;
    std::vector<TokenDistribution> distributions;
    std::string raw_text;
    std::size_t answer_position = 0;
    std::pair<std::size_t, std::size_t> reasoning_span{0, 0};  // [start, end)
    std::optional<std::string> meta;                           // free-form producer notes, kept verbatim

    std::size_t length() const { return tokens.size(); }

    void validate() const;
};

inline void ResponseTrace::validate() const {
    const std::string ctx = "sample_id=" + sample_id;
    if (tokens.empty()) throw validation_error("trace has no tokens at " + ctx);
    if (tokens.size() != distributions.size())
        throw validation_error("tokens (" + std::to_string(tokens.size()) + ") and distributions (" +
                               std::to_string(distributions.size()) + ") lengths differ at " + ctx);
    const std::size_t len = tokens.size();
    if (answer_position >= len)
        throw validation_error("answer_position " + std::to_string(answer_position) + " outside [0," +
                               std::to_string(len) + ") at " + ctx);
    if (reasoning_span.first > reasoning_span.second || reasoning_span.second > len)
        throw validation_error("reasoning_span [" + std::to_string(reasoning_span.first) + "," +
                               std::to_string(reasoning_span.second) + ") invalid for length " + std::to_string(len) +
                               " at " + ctx);
    if (answer_position >= reasoning_span.first && answer_position < reasoning_span.second)
        throw validation_error("answer_position " + std::to_string(answer_position) + " inside reasoning_span at " +
                               ctx);
    std::size_t pos = 0;
    for (const auto& d : distributions) {
        if (tokens[pos] >= d.vocab.size)
            throw validation_error("token id " + std::to_string(tokens[pos]) + " >= vocab size at position " +
                                   std::to_string(pos) + " at " + ctx);
        d.validate(ctx + " (position " + std::to_string(pos) + ")");
        ++pos;
    }
}

// One preference pair. image_ref is an opaque URI and is never dereferenced.
struct PreferenceSample {
    std::string sample_id;
    std::string image_ref;
    std::string query;
    std::string response_a;
    std::string response_b;
    Choice label = Choice::A;
    std::optional<Choice> predicted_label;
};

}  // namespace entro
