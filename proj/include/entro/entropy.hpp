// SPDX-FileCopyrightText: (c) 2026 entro contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "entro/types.hpp"

namespace entro {

/// How the unlisted mass of a top-k distribution enters the entropy sum:
/// `bucket` treats it as one extra outcome, `uniform` spreads it evenly
/// over the unlisted tokens.
enum class TailMode : std::uint8_t { bucket, uniform };

/// Which positions the sentence entropy averages over.
enum class SentenceScope : std::uint8_t { full_sequence, reasoning_span };

/// Composite score design: the answer entropy alone, the sentence entropy
/// alone, or their product.
enum class ScoreMode : std::uint8_t { answer, sentence, mix };

struct EntropyRecord {
    std::string sample_id;
    double answer_entropy = 0.0;    // nats
    double sentence_entropy = 0.0;  // nats
    double composite = 0.0;
    ScoreMode mode = ScoreMode::answer;
    TailMode tail_mode = TailMode::bucket;
};

/// Shannon entropy of one position's distribution, in nats. The distribution
/// is renormalized by its actual mass; 0 * log 0 terms contribute 0. The sum
/// accumulates in long double so that exact cases (uniform, one-hot) come out
/// bit-exact in double.
inline double token_entropy(const TokenDistribution& d, TailMode tail_mode) {
    long double listed = 0.0L;
    for (const auto& [id, p] : d.probs) listed += p;
    const long double tail = d.kind == DistributionKind::topk ? static_cast<long double>(d.tail_mass) : 0.0L;
    const long double total = listed + tail;
    if (total <= 0.0L) return 0.0;

    long double plogp = 0.0L;
    for (const auto& [id, p] : d.probs) {
        if (p > 0.0) plogp += static_cast<long double>(p) * logl(static_cast<long double>(p));
    }
    if (tail > 0.0L) {
        if (tail_mode == TailMode::bucket) {
            plogp += tail * logl(tail);
        } else {
            const std::size_t unlisted = d.vocab.size - d.probs.size();
            if (unlisted == 0)
                throw validation_error("topk distribution lists the full vocabulary but carries tail_mass " +
                                       std::to_string(d.tail_mass) + "; uniform tail spreading is inconsistent");
            // unlisted tokens at tail/unlisted each: sum p log p = tail * log(tail/unlisted)
            plogp += tail * logl(tail / static_cast<long double>(unlisted));
        }
    }
    // H = -sum (p/T) log (p/T) = log T - (sum p log p) / T
    const double h = static_cast<double>(logl(total) - plogp / total);
    return h < 0.0 ? 0.0 : h;
}

/// Entropy at the verdict position (nats).
inline double answer_entropy(const ResponseTrace& trace, TailMode tail_mode) {
    return token_entropy(trace.distributions[trace.answer_position], tail_mode);
}

/// Mean per-position entropy over the full sequence (default) or the
/// reasoning span (nats). Throws on an empty scope.
inline double sentence_entropy(const ResponseTrace& trace, SentenceScope scope, TailMode tail_mode) {
    std::size_t lo = 0;
    std::size_t hi = trace.distributions.size();
    if (scope == SentenceScope::reasoning_span) {
        lo = trace.reasoning_span.first;
        hi = trace.reasoning_span.second;
    }
    if (lo >= hi)
        throw validation_error("sentence entropy over an empty scope at sample_id=" + trace.sample_id);
    long double acc = 0.0L;
    for (std::size_t i = lo; i < hi; ++i) acc += token_entropy(trace.distributions[i], tail_mode);
    return static_cast<double>(acc / static_cast<long double>(hi - lo));
}

inline double composite_score(double answer_e, double sentence_e, ScoreMode mode) {
    switch (mode) {
        case ScoreMode::answer: return answer_e;
        case ScoreMode::sentence: return sentence_e;
        case ScoreMode::mix: return answer_e * sentence_e;
    }
    throw validation_error("unknown score mode");
}

/// What score_dataset does with a trace that fails validation or scoring.
enum class ErrorPolicy : std::uint8_t { abort_on_error, skip_and_log };

/// Score every trace. Output order always equals input order and is
/// independent of `jobs`; per-trace failures are reported with the
/// sample_id attached.
inline std::vector<EntropyRecord> score_dataset(std::span<const ResponseTrace> traces, ScoreMode mode,
                                                SentenceScope scope, TailMode tail_mode,
                                                ErrorPolicy policy = ErrorPolicy::abort_on_error,
                                                unsigned jobs = 1) {
    const std::size_t n = traces.size();
    std::vector<std::optional<EntropyRecord>> slots(n);
    std::vector<std::string> errors(n);

    auto score_one = [&](std::size_t i) {
        try {
            const ResponseTrace& t = traces[i];
            t.validate();
            EntropyRecord rec;
            rec.sample_id = t.sample_id;
            rec.answer_entropy = answer_entropy(t, tail_mode);
            rec.sentence_entropy = sentence_entropy(t, scope, tail_mode);
            rec.composite = composite_score(rec.answer_entropy, rec.sentence_entropy, mode);
            rec.mode = mode;
            rec.tail_mode = tail_mode;
            slots[i] = std::move(rec);
        } catch (const std::exception& e) {
            errors[i] = e.what();
            if (errors[i].find("sample_id=") == std::string::npos)
                errors[i] += " (sample_id=" + traces[i].sample_id + ")";
        }
    };

    if (jobs <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) score_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        const unsigned workers = std::min<std::size_t>(jobs, n);
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) score_one(i);
            });
        }
        for (auto& t : pool) t.join();
    }

    std::vector<EntropyRecord> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (slots[i]) {
            out.push_back(std::move(*slots[i]));
        } else if (policy == ErrorPolicy::abort_on_error) {
            throw validation_error(errors[i]);
        } else {
            std::cerr << "entro: skipping trace: " << errors[i] << "\n";
        }
    }
    return out;
}

inline const char* to_string(ScoreMode m) {
    switch (m) {
        case ScoreMode::answer: return "answer";
        case ScoreMode::sentence: return "sentence";
        case ScoreMode::mix: return "mix";
    }
    return "?";
}

inline const char* to_string(TailMode m) { return m == TailMode::bucket ? "bucket" : "uniform"; }

inline const char* to_string(SentenceScope s) {
    return s == SentenceScope::full_sequence ? "full_sequence" : "reasoning_span";
}

inline ScoreMode score_mode_from_string(const std::string& s) {
    if (s == "answer") return ScoreMode::answer;
    if (s == "sentence") return ScoreMode::sentence;
    if (s == "mix") return ScoreMode::mix;
    throw config_error("unknown score mode '" + s + "' (expected answer|sentence|mix)");
}

inline TailMode tail_mode_from_string(const std::string& s) {
    if (s == "bucket") return TailMode::bucket;
    if (s == "uniform") return TailMode::uniform;
    throw config_error("unknown tail mode '" + s + "' (expected bucket|uniform)");
}

inline SentenceScope scope_from_string(const std::string& s) {
    if (s == "full_sequence" || s == "full") return SentenceScope::full_sequence;
    if (s == "reasoning_span" || s == "reasoning") return SentenceScope::reasoning_span;
    throw config_error("unknown sentence scope '" + s + "' (expected full_sequence|reasoning_span)");
}

}  // namespace entro
