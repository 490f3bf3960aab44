// SPDX-FileCopyrightText: (c) 2026 entro contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "entro/types.hpp"

namespace entro {

/// Verdict parsed from the answer slot; invalid when the slot is missing
/// or does not hold a bare A or B.
enum class Verdict : std::uint8_t { A, B, invalid };

/// The preference the reasoning text itself commits to via a literal
/// "Answer: A" / "Answer: B" marker (case-insensitive, last one wins).
enum class ReasoningConclusion : std::uint8_t { A, B, none };

struct StructuredOutput {
    std::string reasoning_text;
    Verdict answer = Verdict::invalid;
    bool format_ok = false;
    ReasoningConclusion reasoning_conclusion = ReasoningConclusion::none;

    friend bool operator==(const StructuredOutput&, const StructuredOutput&) = default;
};

struct RewardConfig {
    double alpha = 0.5;  // logic weight
    double beta = 0.5;   // format weight
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline bool all_whitespace(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

inline std::size_t count_occurrences(std::string_view text, std::string_view needle) {
    std::size_t count = 0;
    for (std::size_t pos = text.find(needle); pos != std::string_view::npos; pos = text.find(needle, pos + 1)) ++count;
    return count;
}

inline ReasoningConclusion find_conclusion(std::string_view reasoning) {
    std::string lower(reasoning);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    const std::size_t pos_a = lower.rfind("answer: a");
    const std::size_t pos_b = lower.rfind("answer: b");
    if (pos_a == std::string::npos && pos_b == std::string::npos) return ReasoningConclusion::none;
    if (pos_a == std::string::npos) return ReasoningConclusion::B;
    if (pos_b == std::string::npos) return ReasoningConclusion::A;
    return pos_a > pos_b ? ReasoningConclusion::A : ReasoningConclusion::B;
}

}  // namespace detail

/// Parse a raw model output against the canonical template
/// `<think>...</think><answer>X</answer>`. Total: malformed text comes back
/// with format_ok=false and answer possibly invalid, never an exception.
/// The answer is extracted from a unique answer block even when the
/// surrounding format is broken; format_ok additionally requires exactly
/// one think block, template order, nothing but whitespace outside the
/// blocks, and a parsable X.
inline StructuredOutput parse_output(std::string_view raw) {
    static constexpr std::string_view kThinkOpen = "<think>";
    static constexpr std::string_view kThinkClose = "</think>";
    static constexpr std::string_view kAnswerOpen = "<answer>";
    static constexpr std::string_view kAnswerClose = "</answer>";

    StructuredOutput out;

    const std::size_t n_think_open = detail::count_occurrences(raw, kThinkOpen);
    const std::size_t n_think_close = detail::count_occurrences(raw, kThinkClose);
    const std::size_t n_answer_open = detail::count_occurrences(raw, kAnswerOpen);
    const std::size_t n_answer_close = detail::count_occurrences(raw, kAnswerClose);

    const std::size_t think_open = raw.find(kThinkOpen);
    const std::size_t think_close = raw.find(kThinkClose);
    const std::size_t answer_open = raw.find(kAnswerOpen);
    const std::size_t answer_close = raw.find(kAnswerClose);

    if (n_think_open == 1 && n_think_close == 1 && think_open < think_close) {
        const std::size_t begin = think_open + kThinkOpen.size();
        out.reasoning_text = std::string(raw.substr(begin, think_close - begin));
        out.reasoning_conclusion = detail::find_conclusion(out.reasoning_text);
    }

    if (n_answer_open == 1 && n_answer_close == 1 && answer_open < answer_close) {
        const std::size_t begin = answer_open + kAnswerOpen.size();
        const std::string_view slot = detail::trim(raw.substr(begin, answer_close - begin));
        if (slot == "A") out.answer = Verdict::A;
        else if (slot == "B") out.answer = Verdict::B;
    }

    out.format_ok = n_think_open == 1 && n_think_close == 1 && n_answer_open == 1 && n_answer_close == 1 &&
                    think_open < think_close && think_close < answer_open && answer_open < answer_close &&
                    detail::all_whitespace(raw.substr(0, think_open)) &&
                    detail::all_whitespace(raw.substr(think_close + kThinkClose.size(),
                                                      answer_open - (think_close + kThinkClose.size()))) &&
                    detail::all_whitespace(raw.substr(answer_close + kAnswerClose.size())) &&
                    out.answer != Verdict::invalid;
    return out;
}

/// Canonical re-rendering of a parsed output; an invalid answer renders as
/// an empty slot.
inline std::string render_output(const StructuredOutput& out) {
    std::string answer;
    if (out.answer == Verdict::A) answer = "A";
    else if (out.answer == Verdict::B) answer = "B";
    return "<think>" + out.reasoning_text + "</think><answer>" + answer + "</answer>";
}

struct RewardTerms {
    int accuracy = 0;  // 1 if the answer matches gold
    int logic = -1;    // +1 when the reasoning commits to the emitted answer
    int format = 0;    // 1 when the template is strictly followed
};

inline RewardTerms reward_terms(const StructuredOutput& out, Choice gold) {
    RewardTerms terms;
    const Verdict want = gold == Choice::A ? Verdict::A : Verdict::B;
    terms.accuracy = out.answer == want ? 1 : 0;
    const bool aligned =
        (out.reasoning_conclusion == ReasoningConclusion::A && out.answer == Verdict::A) ||
        (out.reasoning_conclusion == ReasoningConclusion::B && out.answer == Verdict::B);
    terms.logic = aligned ? 1 : -1;
    terms.format = out.format_ok ? 1 : 0;
    return terms;
}

/// R = R_acc * (1 + alpha * R_logic) + beta * R_format.
inline double compute_reward(const StructuredOutput& out, Choice gold, const RewardConfig& cfg) {
    const RewardTerms t = reward_terms(out, gold);
    return t.accuracy * (1.0 + cfg.alpha * t.logic) + cfg.beta * t.format;
}

/// One candidate trajectory offered to the fidelity filter.
struct Attempt {
    Choice predicted = Choice::A;
    std::string trajectory;
};

struct FidelityResult {
    Attempt attempt;
    std::size_t attempts_used = 0;  // 1-based
};

/// Draw candidates in order (at most max_attempts, fewer if the source is
/// exhausted) and keep the first whose predicted label matches the sample's
/// ground truth. Source is a callable returning std::optional<Attempt>;
/// source failures are rethrown with the attempt index attached.
template <class Source>
std::optional<FidelityResult> fidelity_filter(const PreferenceSample& sample, Source&& next_attempt,
                                              std::size_t max_attempts = 3) {
    for (std::size_t attempt = 1; attempt <= max_attempts; ++attempt) {
        std::optional<Attempt> candidate;
        try {
            candidate = next_attempt();
        } catch (const std::exception& e) {
            throw error("attempt " + std::to_string(attempt) + " failed for sample_id=" + sample.sample_id + ": " +
                        e.what());
        }
        if (!candidate) break;  // source exhausted early
        if (candidate->predicted == sample.label) return FidelityResult{std::move(*candidate), attempt};
    }
    return std::nullopt;
}

}  // namespace entro
