// SPDX-FileCopyrightText: (c) 2026 entro contributors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch.hpp>

#include <set>
#include <vector>

#include "entro/reward.hpp"
#include "entro/rng.hpp"
#include "helpers.hpp"

using namespace entro;

TEST_CASE("parse_output: canonical template") {
    const auto out = parse_output("<think>Response A is factually wrong. Answer: B</think><answer>B</answer>");
    CHECK(out.answer == Verdict::B);
    CHECK(out.format_ok);
    CHECK(out.reasoning_conclusion == ReasoningConclusion::B);
    CHECK(out.reasoning_text == "Response A is factually wrong. Answer: B");
}

TEST_CASE("parse_output: bare text has no template") {
    const auto out = parse_output("B");
    CHECK(out.answer == Verdict::invalid);
    CHECK_FALSE(out.format_ok);
    CHECK(out.reasoning_conclusion == ReasoningConclusion::none);
}

TEST_CASE("parse_output: misaligned conclusion is preserved") {
    const auto out = parse_output("<think>weighing both. Answer: A</think><answer>B</answer>");
    CHECK(out.answer == Verdict::B);
    CHECK(out.format_ok);
    CHECK(out.reasoning_conclusion == ReasoningConclusion::A);
}

TEST_CASE("parse_output: structural edge cases") {
    SECTION("whitespace around and inside the answer slot is fine") {
        const auto out = parse_output("  <think>t. Answer: a</think>\n<answer> A </answer>  ");
        CHECK(out.answer == Verdict::A);
        CHECK(out.format_ok);
        CHECK(out.reasoning_conclusion == ReasoningConclusion::A);
    }
    SECTION("lowercase answer slot is invalid") {
        const auto out = parse_output("<think>t</think><answer>b</answer>");
        CHECK(out.answer == Verdict::invalid);
        CHECK_FALSE(out.format_ok);
    }
    SECTION("two answer blocks break both the answer and the format") {
        const auto out = parse_output("<think>t</think><answer>A</answer><answer>B</answer>");
        CHECK(out.answer == Verdict::invalid);
        CHECK_FALSE(out.format_ok);
    }
    SECTION("text outside the template breaks the format but not the answer") {
        const auto out = parse_output("preamble <think>t. Answer: B</think><answer>B</answer>");
        CHECK(out.answer == Verdict::B);
        CHECK_FALSE(out.format_ok);
        CHECK(out.reasoning_conclusion == ReasoningConclusion::B);
    }
    SECTION("answer before think breaks the format") {
        const auto out = parse_output("<answer>A</answer><think>t</think>");
        CHECK(out.answer == Verdict::A);
        CHECK_FALSE(out.format_ok);
    }
    SECTION("unparseable slot with otherwise perfect structure") {
        const auto out = parse_output("<think>t</think><answer>AB</answer>");
        CHECK(out.answer == Verdict::invalid);
        CHECK_FALSE(out.format_ok);
    }
    SECTION("conclusion: last marker wins, case-insensitive") {
        const auto out = parse_output("<think>Answer: B ... wait, ANSWER: A</think><answer>A</answer>");
        CHECK(out.reasoning_conclusion == ReasoningConclusion::A);
    }
    SECTION("empty string") {
        const auto out = parse_output("");
        CHECK(out.answer == Verdict::invalid);
        CHECK_FALSE(out.format_ok);
    }
}

TEST_CASE("parse_output is idempotent on its canonical re-rendering") {
    const std::vector<std::string> inputs{
        "<think>ok. Answer: A</think><answer>A</answer>",
        "<think>ok. Answer: B</think><answer>A</answer>",
        "garbage",
        "<think>unclosed",
        "prefix <think>t</think><answer>B</answer> suffix",
        "<think>t</think><answer>?</answer>",
        "",
    };
    for (const auto& raw : inputs) {
        const auto first = parse_output(render_output(parse_output(raw)));
        const auto second = parse_output(render_output(first));
        CHECK(first == second);
    }
}

TEST_CASE("compute_reward: frozen formula evaluations") {
    const RewardConfig cfg{0.5, 0.5};
    SECTION("correct, aligned, formatted = 2.0") {
        const auto out = parse_output("<think>clear. Answer: A</think><answer>A</answer>");
        CHECK(compute_reward(out, Choice::A, cfg) == Approx(2.0));
    }
    SECTION("correct, misaligned, formatted = 1.0") {
        const auto out = parse_output("<think>clear. Answer: B</think><answer>A</answer>");
        CHECK(compute_reward(out, Choice::A, cfg) == Approx(1.0));
    }
    SECTION("wrong answer, broken format = 0") {
        const auto out = parse_output("A");
        CHECK(compute_reward(out, Choice::B, cfg) == 0.0);
    }
    SECTION("missing conclusion counts as misaligned") {
        const auto out = parse_output("<think>no commitment here</think><answer>A</answer>");
        CHECK(compute_reward(out, Choice::A, cfg) == Approx(1.0));
    }
    SECTION("invalid answer counts as wrong") {
        const auto out = parse_output("<think>t. Answer: A</think><answer>C</answer>");
        CHECK(compute_reward(out, Choice::A, cfg) == 0.0);
    }
}

TEST_CASE("compute_reward: exhaustive 8-case value set with alpha=beta=0.5") {
    const RewardConfig cfg{0.5, 0.5};
    std::set<double> values;
    int cases = 0;
    for (int acc = 0; acc <= 1; ++acc) {
        for (int logic = -1; logic <= 1; logic += 2) {
            for (int fmt = 0; fmt <= 1; ++fmt) {
                StructuredOutput out;
                out.answer = acc ? Verdict::A : Verdict::B;  // gold is A below
                out.reasoning_conclusion = logic > 0 ? (acc ? ReasoningConclusion::A : ReasoningConclusion::B)
                                                     : (acc ? ReasoningConclusion::B : ReasoningConclusion::A);
                out.format_ok = fmt == 1;
                const auto terms = reward_terms(out, Choice::A);
                REQUIRE(terms.accuracy == acc);
                REQUIRE(terms.logic == logic);
                REQUIRE(terms.format == fmt);
                values.insert(compute_reward(out, Choice::A, cfg));
                ++cases;
            }
        }
    }
    CHECK(cases == 8);
    CHECK(values == std::set<double>{0.0, 0.5, 1.0, 1.5, 2.0});
}

TEST_CASE("compute_reward: R_acc=0 makes the logic term irrelevant") {
    for (double alpha : {0.1, 0.5, 0.9}) {
        const RewardConfig cfg{alpha, 0.5};
        StructuredOutput wrong;
        wrong.answer = Verdict::B;
        wrong.format_ok = true;
        wrong.reasoning_conclusion = ReasoningConclusion::B;  // aligned
        const double aligned = compute_reward(wrong, Choice::A, cfg);
        wrong.reasoning_conclusion = ReasoningConclusion::A;  // misaligned
        const double misaligned = compute_reward(wrong, Choice::A, cfg);
        CHECK(aligned == misaligned);
    }
}

TEST_CASE("fidelity_filter") {
    const auto sample = testutil::sample("f1", Choice::B);
    auto scripted = [](std::vector<Choice> sequence) {
        auto it = std::make_shared<std::size_t>(0);
        auto seq = std::make_shared<std::vector<Choice>>(std::move(sequence));
        return [it, seq]() -> std::optional<Attempt> {
            if (*it >= seq->size()) return std::nullopt;
            const Choice c = (*seq)[(*it)++];
            return Attempt{c, std::string("traj-") + choice_letter(c)};
        };
    };

    SECTION("first candidate correct") {
        const auto result = fidelity_filter(sample, scripted({Choice::B, Choice::A}));
        REQUIRE(result.has_value());
        CHECK(result->attempts_used == 1);
        CHECK(result->attempt.predicted == Choice::B);
    }
    SECTION("wrong, wrong, correct uses three attempts") {
        const auto result = fidelity_filter(sample, scripted({Choice::A, Choice::A, Choice::B}));
        REQUIRE(result.has_value());
        CHECK(result->attempts_used == 3);
    }
    SECTION("three wrong candidates discard the sample") {
        CHECK_FALSE(fidelity_filter(sample, scripted({Choice::A, Choice::A, Choice::A})).has_value());
    }
    SECTION("a correct fourth candidate is never drawn") {
        int draws = 0;
        auto counting = [&]() -> std::optional<Attempt> {
            ++draws;
            return Attempt{draws == 4 ? Choice::B : Choice::A, "t"};
        };
        CHECK_FALSE(fidelity_filter(sample, counting).has_value());
        CHECK(draws == 3);
    }
    SECTION("exhausted source stops early") {
        int draws = 0;
        auto short_source = [&]() -> std::optional<Attempt> {
            ++draws;
            if (draws > 1) return std::nullopt;
            return Attempt{Choice::A, "t"};
        };
        CHECK_FALSE(fidelity_filter(sample, short_source).has_value());
        CHECK(draws == 2);
    }
    SECTION("source failure carries the attempt index") {
        auto failing = [&]() -> std::optional<Attempt> { throw std::runtime_error("backend down"); };
        try {
            fidelity_filter(sample, failing);
            FAIL("expected error");
        } catch (const error& e) {
            const std::string what = e.what();
            CHECK(what.find("attempt 1") != std::string::npos);
            CHECK(what.find("backend down") != std::string::npos);
        }
    }
    SECTION("randomized scripts: earliest success, cap respected") {
        Rng rng(0xf1de);
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<Choice> seq;
            const std::size_t len = rng.index(6);
            for (std::size_t i = 0; i < len; ++i) seq.push_back(rng.bernoulli(0.4) ? Choice::B : Choice::A);
            std::size_t expected = 0;  // 0 = discard
            for (std::size_t i = 0; i < std::min<std::size_t>(seq.size(), 3); ++i) {
                if (seq[i] == Choice::B) {
                    expected = i + 1;
                    break;
                }
            }
            const auto result = fidelity_filter(sample, scripted(seq));
            if (expected == 0) CHECK_FALSE(result.has_value());
            else {
                REQUIRE(result.has_value());
                CHECK(result->attempts_used == expected);
            }
        }
    }
}
