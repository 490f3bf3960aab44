// SPDX-FileCopyrightText: (c) 2026 entro contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "entro/entropy.hpp"
#include "entro/rng.hpp"
#include "entro/types.hpp"

namespace testutil {

inline entro::TokenDistribution dense(std::vector<double> probs) {
    entro::TokenDistribution d;
    d.kind = entro::DistributionKind::dense;
    d.vocab.size = static_cast<std::uint32_t>(probs.size());
    for (std::uint32_t i = 0; i < probs.size(); ++i) d.probs.emplace_back(i, probs[i]);
    return d;
}

inline entro::TokenDistribution topk(std::vector<std::pair<std::uint32_t, double>> probs, double tail,
                                     std::uint32_t vocab_size) {
    entro::TokenDistribution d;
    d.kind = entro::DistributionKind::topk;
    d.probs = std::move(probs);
    d.tail_mass = tail;
    d.vocab.size = vocab_size;
    return d;
}

inline entro::TokenDistribution uniform_dense(std::uint32_t vocab_size) {
    return dense(std::vector<double>(vocab_size, 1.0 / vocab_size));
}

// one trace whose every position carries the given distribution
inline entro::ResponseTrace constant_trace(const std::string& id, const entro::TokenDistribution& d,
                                           std::size_t length) {
    entro::ResponseTrace t;
    t.sample_id = id;
    t.raw_text = "<think>fixture. Answer: A</think><answer>A</answer>";
    for (std::size_t i = 0; i < length; ++i) {
        t.tokens.push_back(0);
        t.distributions.push_back(d);
    }
    t.answer_position = length - 1;
    t.reasoning_span = {0, length - 1};
    return t;
}

// random dense distribution over a vocab of the given size
inline entro::TokenDistribution random_dense(entro::Rng& rng, std::uint32_t vocab_size) {
    std::vector<double> mass(vocab_size);
    double total = 0.0;
    for (auto& m : mass) {
        m = -std::log(1.0 - rng.uniform01());  // exponential, normalizes to a Dirichlet(1) draw
        total += m;
    }
    for (auto& m : mass) m /= total;
    return dense(mass);
}

inline entro::EntropyRecord record(const std::string& id, double composite) {
    entro::EntropyRecord rec;
    rec.sample_id = id;
    rec.composite = composite;
    rec.answer_entropy = composite;
    rec.sentence_entropy = composite;
    return rec;
}

inline entro::PreferenceSample sample(const std::string& id, entro::Choice label) {
    entro::PreferenceSample s;
    s.sample_id = id;
    s.image_ref = "file://img/" + id;
    s.query = "query for " + id;
    s.response_a = "candidate A for " + id;
    s.response_b = "candidate B for " + id;
    s.label = label;
    return s;
}

}  // namespace testutil
