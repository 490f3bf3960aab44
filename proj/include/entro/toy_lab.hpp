// SPDX-FileCopyrightText: (c) 2026 entro contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "entro/curation.hpp"
#include "entro/curriculum.hpp"
#include "entro/entropy.hpp"
#include "entro/reward.hpp"
#include "entro/rng.hpp"
#include "entro/stats.hpp"
#include "entro/types.hpp"

// Desk-scale synthetic experiment lab: generates noisy preference pairs with
// a known latent difficulty structure, trains a tiny logistic scorer, probes
// entropies and runs the curation/curriculum ablation arms end to end.

namespace entro::lab {

struct SyntheticConfig {
    std::size_t n_samples = 6000;
    std::size_t feature_dim = 32;
    double noise_rate = 0.3;    // marginal label-flip probability, in [0, 0.5)
    double margin_scale = 1.2;  // latent margin of the clear stratum
    std::uint64_t seed = 1;

    void validate() const {
        if (n_samples < 1) throw validation_error("n_samples must be positive");
        if (feature_dim < 1) throw validation_error("feature_dim must be positive");
        if (!(noise_rate >= 0.0 && noise_rate < 0.5))
            throw validation_error("noise_rate must lie in [0, 0.5)");
        if (!(margin_scale > 0.0)) throw validation_error("margin_scale must be positive");
    }
};

// Linear pairwise scorer; sigmoid(score) is the probability that response A
// is preferred, which is also the answer-token distribution over {A, B}.
struct TinyScorer {
    std::vector<double> weights;
    double bias = 0.0;

    double score(std::span<const double> x) const {
        long double acc = bias;
        for (std::size_t i = 0; i < weights.size(); ++i) acc += weights[i] * x[i];
        return static_cast<double>(acc);
    }

    bool finite() const {
        if (!std::isfinite(bias)) return false;
        return std::all_of(weights.begin(), weights.end(), [](double w) { return std::isfinite(w); });
    }
};

inline double sigmoid(double s) {
    if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
    const double e = std::exp(s);
    return e / (1.0 + e);
}

struct SyntheticDataset {
    std::vector<PreferenceSample> samples;          // label = observed (possibly flipped)
    std::vector<std::vector<double>> features;      // one vector per sample
    std::vector<std::uint8_t> noise_flags;          // 1 when observed label != latent label

    Choice true_label(std::size_t i) const {
        return noise_flags[i] ? other(samples[i].label) : samples[i].label;
    }
};

// Difficulty mixture: a fraction 2*eta of samples is "ambiguous" (latent
// margin near zero, annotation a fair coin), the rest sit on a clear shell
// at |margin| ~ margin_scale with clean labels. Flip events are independent
// across samples with marginal probability exactly eta.
inline SyntheticDataset generate(const SyntheticConfig& config) {
    config.validate();
    constexpr double kAmbiguousMagnitude = 0.02;
    constexpr double kShellJitter = 0.3;

    Rng rng(splitmix64(config.seed));
    const std::size_t dim = config.feature_dim;

    std::vector<double> axis(dim);
    long double norm = 0.0L;
    for (auto& a : axis) {
        a = rng.normal();
        norm += a * a;
    }
    const double inv = 1.0 / std::sqrt(static_cast<double>(norm));
    for (auto& a : axis) a *= inv;

    SyntheticDataset ds;
    ds.samples.resize(config.n_samples);
    ds.features.resize(config.n_samples);
    ds.noise_flags.resize(config.n_samples);

    for (std::size_t i = 0; i < config.n_samples; ++i) {
        auto& x = ds.features[i];
        x.resize(dim);
        for (auto& v : x) v = rng.normal();

        const bool ambiguous = rng.bernoulli(2.0 * config.noise_rate);
        const double draw = std::abs(rng.normal());
        const double magnitude = ambiguous ? config.margin_scale * kAmbiguousMagnitude * draw
                                           : config.margin_scale * (1.0 + kShellJitter * draw);
        const double margin = (rng.bernoulli(0.5) ? 1.0 : -1.0) * magnitude;

        long double proj = 0.0L;
        for (std::size_t d = 0; d < dim; ++d) proj += axis[d] * x[d];
        for (std::size_t d = 0; d < dim; ++d) x[d] += (margin - static_cast<double>(proj)) * axis[d];

        const Choice latent = margin >= 0.0 ? Choice::A : Choice::B;
        const Choice coin = rng.bernoulli(0.5) ? Choice::A : Choice::B;
        const Choice observed = ambiguous ? coin : latent;

        char id[24];
        std::snprintf(id, sizeof(id), "syn-%06zu", i);
        auto& s = ds.samples[i];
        s.sample_id = id;
        s.image_ref = std::string("synthetic://pair/") + id;
        s.query = std::string("Which response answers item ") + id + " better?";
        s.response_a = std::string("Response A for ") + id + " (features row " + std::to_string(i) + ")";
        s.response_b = std::string("Response B for ") + id + " (features row " + std::to_string(i) + ")";
        s.label = observed;
        ds.noise_flags[i] = observed != latent ? 1 : 0;
    }
    return ds;
}

inline double nll_loss(const TinyScorer& scorer, std::span<const std::vector<double>> features,
                       std::span<const Choice> labels) {
    if (features.empty()) throw validation_error("nll_loss: empty data");
    long double acc = 0.0L;
    for (std::size_t i = 0; i < features.size(); ++i) {
        const double s = scorer.score(features[i]);
        const double z = labels[i] == Choice::A ? s : -s;  // margin of the observed label
        acc += z < -30.0 ? -z : std::log1p(std::exp(-z));
    }
    return static_cast<double>(acc / features.size());
}

inline void nll_gradient(const TinyScorer& scorer, std::span<const std::vector<double>> features,
                         std::span<const Choice> labels, std::vector<double>& grad_w, double& grad_b) {
    grad_w.assign(scorer.weights.size(), 0.0);
    grad_b = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i) {
        const double g = sigmoid(scorer.score(features[i])) - (labels[i] == Choice::A ? 1.0 : 0.0);
        for (std::size_t d = 0; d < grad_w.size(); ++d) grad_w[d] += g * features[i][d];
        grad_b += g;
    }
    const double inv = 1.0 / static_cast<double>(features.size());
    for (auto& g : grad_w) g *= inv;
    grad_b *= inv;
}

/// SGD on the negative log-likelihood of the observed labels, from a zero
/// initialization. Deterministic given the seed; throws if the fit diverges.
inline TinyScorer warmup(std::span<const PreferenceSample> samples, std::span<const std::vector<double>> features,
                         std::size_t steps, double lr, std::uint64_t seed) {
    if (samples.empty() || samples.size() != features.size())
        throw validation_error("warmup: samples and features must be nonempty and aligned");
    TinyScorer scorer;
    scorer.weights.assign(features.front().size(), 0.0);
    Rng rng(mix_seed(seed, 0x77617265ULL));
    for (std::size_t step = 0; step < steps; ++step) {
        const std::size_t i = rng.index(samples.size());
        const double g = sigmoid(scorer.score(features[i])) - (samples[i].label == Choice::A ? 1.0 : 0.0);
        for (std::size_t d = 0; d < scorer.weights.size(); ++d) scorer.weights[d] -= lr * g * features[i][d];
        scorer.bias -= lr * g;
        if ((step & 0x1ff) == 0x1ff && !scorer.finite()) throw error("warmup diverged: non-finite parameters");
    }
    if (!scorer.finite()) throw error("warmup diverged: non-finite parameters");
    return scorer;
}

namespace detail {

inline std::string render_trajectory(double score, Choice verdict) {
    char buf[128];
    const char c = choice_letter(verdict);
    std::snprintf(buf, sizeof(buf), "<think>pairwise score %+.4g. Answer: %c</think><answer>%c</answer>", score, c,
                  c);
    return buf;
}

}  // namespace detail

/// Emit one structured trace per sample: four reasoning positions whose
/// distributions sharpen toward the verdict, then the answer position with
/// distribution (sigmoid(s), 1 - sigmoid(s)) over the two verdict tokens.
inline std::vector<ResponseTrace> probe(const TinyScorer& scorer, std::span<const PreferenceSample> samples,
                                        std::span<const std::vector<double>> features) {
    static constexpr double kRamp[] = {0.25, 0.5, 0.75, 1.0};
    const VocabSpec vocab{2};
    std::vector<ResponseTrace> traces;
    traces.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double s = scorer.score(features[i]);
        ResponseTrace t;
        t.sample_id = samples[i].sample_id;
        for (double ramp : kRamp) {
            const double p = sigmoid(ramp * s);
            TokenDistribution d;
            d.kind = DistributionKind::dense;
            d.vocab = vocab;
            d.probs = {{0u, p}, {1u, 1.0 - p}};
            t.tokens.push_back(p >= 0.5 ? 0u : 1u);
            t.distributions.push_back(std::move(d));
        }
        const double p_answer = sigmoid(s);
        TokenDistribution answer;
        answer.kind = DistributionKind::dense;
        answer.vocab = vocab;
        answer.probs = {{0u, p_answer}, {1u, 1.0 - p_answer}};
        t.tokens.push_back(p_answer >= 0.5 ? 0u : 1u);
        t.distributions.push_back(std::move(answer));
        t.answer_position = t.tokens.size() - 1;
        t.reasoning_span = {0, t.tokens.size() - 1};
        t.raw_text = detail::render_trajectory(s, p_answer >= 0.5 ? Choice::A : Choice::B);
        t.meta = R"({"decoding":"greedy"})";
        traces.push_back(std::move(t));
    }
    return traces;
}

/// Copy each trace's verdict token into the matching sample's
/// predicted_label.
inline void attach_predictions(std::span<PreferenceSample> samples, std::span<const ResponseTrace> traces) {
    if (samples.size() != traces.size()) throw validation_error("attach_predictions: size mismatch");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].sample_id != traces[i].sample_id)
            throw validation_error("attach_predictions: id mismatch at index " + std::to_string(i));
        samples[i].predicted_label = traces[i].tokens[traces[i].answer_position] == 0 ? Choice::A : Choice::B;
    }
}

enum class UpdateRule : std::uint8_t { reinforce, nll };

inline const char* to_string(UpdateRule r) { return r == UpdateRule::reinforce ? "reinforce" : "nll"; }

inline UpdateRule update_rule_from_string(const std::string& s) {
    if (s == "reinforce") return UpdateRule::reinforce;
    if (s == "nll") return UpdateRule::nll;
    throw config_error("unknown update rule '" + s + "' (expected reinforce|nll)");
}

enum class Arm : std::uint8_t {
    full,
    lowest_n_sorted,
    lowest_n_unsorted,
    random_n,
    accuracy_n,
    mid_n,
    high_n,
    scale_5,
    scale_15,
    scale_50,
    scale_100,
};

inline const char* to_string(Arm a) {
    switch (a) {
        case Arm::full: return "full";
        case Arm::lowest_n_sorted: return "lowest_n_sorted";
        case Arm::lowest_n_unsorted: return "lowest_n_unsorted";
        case Arm::random_n: return "random_n";
        case Arm::accuracy_n: return "accuracy_n";
        case Arm::mid_n: return "mid_n";
        case Arm::high_n: return "high_n";
        case Arm::scale_5: return "scale_5";
        case Arm::scale_15: return "scale_15";
        case Arm::scale_50: return "scale_50";
        case Arm::scale_100: return "scale_100";
    }
    return "?";
}

inline std::vector<Arm> all_arms() {
    return {Arm::full,       Arm::lowest_n_sorted, Arm::lowest_n_unsorted, Arm::random_n,
            Arm::accuracy_n, Arm::mid_n,           Arm::high_n,            Arm::scale_5,
            Arm::scale_15,   Arm::scale_50,        Arm::scale_100};
}

inline Arm arm_from_string(const std::string& s) {
    for (Arm a : all_arms()) {
        if (s == to_string(a)) return a;
    }
    throw config_error("unknown arm '" + s + "'");
}

struct LabConfig {
    SyntheticConfig synth;
    double warmup_fraction = 0.25;
    double pool_fraction = 0.55;
    std::size_t warmup_steps = 2000;
    double warmup_lr = 0.1;
    std::size_t train_epochs = 6;
    double train_lr = 0.5;
    std::size_t batch_size = 32;
    double selection_fraction = 0.15;
    std::size_t num_bins = 10;
    ScoreMode mode = ScoreMode::answer;
    SentenceScope scope = SentenceScope::full_sequence;
    TailMode tail_mode = TailMode::bucket;
    UpdateRule update_rule = UpdateRule::reinforce;
    RewardConfig reward;
    std::size_t accuracy_decodes = 4;  // stochastic decodes per sample for the accuracy_n arm

    void validate() const {
        synth.validate();
        if (!(warmup_fraction > 0.0 && pool_fraction > 0.0 && warmup_fraction + pool_fraction < 1.0))
            throw validation_error("warmup_fraction and pool_fraction must be positive and sum below 1");
        if (!(selection_fraction > 0.0 && selection_fraction <= 1.0))
            throw validation_error("selection_fraction must lie in (0, 1]");
        if (train_epochs < 1 || batch_size < 1 || accuracy_decodes < 1)
            throw validation_error("train_epochs, batch_size and accuracy_decodes must be >= 1");
        if (num_bins < 2) throw validation_error("num_bins must be >= 2");
    }
};

struct ProbeSeedStats {
    std::uint64_t seed = 0;
    double flip_fraction = 0.0;
    std::optional<double> bin_trend_rho;
    bool noise_defined = false;
    double noise_p = 1.0;  // one-sided, H1: flipped entropy > clean entropy
    double flipped_mean_entropy = 0.0;
    double clean_mean_entropy = 0.0;
};

struct ArmStats {
    std::vector<double> per_seed_accuracy;
    double mean = 0.0;
    double stddev = 0.0;
};

struct ArmComparison {
    std::string better;
    std::string baseline;
    double mean_diff = 0.0;
    double se_diff = 0.0;
    bool exceeds_one_se = false;
};

struct ExperimentReport {
    std::vector<std::uint64_t> seeds;
    std::vector<std::pair<Arm, ArmStats>> arms;
    std::vector<ProbeSeedStats> probe;
    std::vector<ArmComparison> comparisons;

    const ArmStats* find(Arm a) const {
        for (const auto& [arm, st] : arms) {
            if (arm == a) return &st;
        }
        return nullptr;
    }
};

namespace detail {

// stream tags for per-seed rng derivations
constexpr std::uint64_t kStreamRandomSelection = 0x01;
constexpr std::uint64_t kStreamAccuracyDecodes = 0x02;
constexpr std::uint64_t kStreamArmBase = 0x100;

struct SeedOutcome {
    ProbeSeedStats probe;
    std::map<Arm, double> accuracy;
};

inline double train_and_evaluate(const LabConfig& cfg, const TinyScorer& start, const CurriculumSchedule& schedule,
                                 const SyntheticDataset& ds, const std::unordered_map<std::string, std::size_t>& index,
                                 std::size_t eval_begin, std::uint64_t stream_seed) {
    TinyScorer scorer = start;
    Rng rng(stream_seed);
    // reward midpoint between a fully correct and a fully wrong trajectory
    const double reward_hi = 1.0 * (1.0 + cfg.reward.alpha) + cfg.reward.beta;
    const double reward_lo = cfg.reward.beta;
    const double baseline = 0.5 * (reward_hi + reward_lo);

    for (const auto& epoch : schedule.order) {
        for (const auto& batch : epoch) {
            for (const auto& id : batch) {
                const std::size_t i = index.at(id);
                const auto& x = ds.features[i];
                const double s = scorer.score(x);
                const double p_a = sigmoid(s);
                double coeff = 0.0;
                if (cfg.update_rule == UpdateRule::reinforce) {
                    const Choice verdict = rng.bernoulli(p_a) ? Choice::A : Choice::B;
                    const StructuredOutput out = parse_output(detail::render_trajectory(s, verdict));
                    const double reward = compute_reward(out, ds.samples[i].label, cfg.reward);
                    coeff = cfg.train_lr * (reward - baseline) * ((verdict == Choice::A ? 1.0 : 0.0) - p_a);
                } else {
                    coeff = -cfg.train_lr * (p_a - (ds.samples[i].label == Choice::A ? 1.0 : 0.0));
                }
                for (std::size_t d = 0; d < scorer.weights.size(); ++d) scorer.weights[d] += coeff * x[d];
                scorer.bias += coeff;
            }
        }
        if (!scorer.finite()) throw error("continue-training diverged: non-finite parameters");
    }

    std::size_t correct = 0;
    const std::size_t n = ds.samples.size();
    for (std::size_t i = eval_begin; i < n; ++i) {
        const Choice predicted = scorer.score(ds.features[i]) >= 0.0 ? Choice::A : Choice::B;
        correct += predicted == ds.true_label(i) ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(n - eval_begin);
}

inline SeedOutcome run_seed(const LabConfig& cfg, std::uint64_t seed, std::span<const Arm> arms) {
    SyntheticConfig synth = cfg.synth;
    synth.seed = seed;
    const SyntheticDataset ds = generate(synth);

    const std::size_t n = ds.samples.size();
    const auto n_warm = static_cast<std::size_t>(static_cast<double>(n) * cfg.warmup_fraction);
    const auto n_pool = static_cast<std::size_t>(static_cast<double>(n) * cfg.pool_fraction);
    if (n_warm < 1 || n_pool < 3 || n_warm + n_pool + 2 > n)
        throw validation_error("n_samples too small for the warmup/pool/eval splits");
    const std::size_t pool_begin = n_warm;
    const std::size_t eval_begin = n_warm + n_pool;

    const TinyScorer base = warmup(std::span(ds.samples).subspan(0, n_warm),
                                   std::span(ds.features).subspan(0, n_warm), cfg.warmup_steps, cfg.warmup_lr, seed);

    const auto pool_samples = std::span(ds.samples).subspan(pool_begin, n_pool);
    const auto pool_features = std::span(ds.features).subspan(pool_begin, n_pool);
    const auto traces = probe(base, pool_samples, pool_features);
    const auto records = score_dataset(traces, cfg.mode, cfg.scope, cfg.tail_mode);

    std::vector<PreferenceSample> labeled(pool_samples.begin(), pool_samples.end());
    attach_predictions(labeled, traces);

    SeedOutcome outcome;
    outcome.probe.seed = seed;
    {
        std::size_t flips = 0;
        for (auto f : ds.noise_flags) flips += f;
        outcome.probe.flip_fraction = static_cast<double>(flips) / static_cast<double>(n);

        const BinReport bins = bin_accuracy(records, labeled, cfg.num_bins);
        outcome.probe.bin_trend_rho = bins.trend;

        std::vector<double> flipped, clean;
        for (std::size_t i = 0; i < n_pool; ++i) {
            (ds.noise_flags[pool_begin + i] ? flipped : clean).push_back(records[i].composite);
        }
        if (flipped.size() >= 2 && clean.size() >= 2) {
            outcome.probe.noise_defined = true;
            outcome.probe.noise_p = stats::welch_one_sided_p(flipped, clean);
            outcome.probe.flipped_mean_entropy = stats::mean(flipped);
            outcome.probe.clean_mean_entropy = stats::mean(clean);
        }
    }

    if (arms.empty()) return outcome;

    std::unordered_map<std::string, std::size_t> index;  // sample_id -> dataset index
    index.reserve(n_pool);
    for (std::size_t i = 0; i < n_pool; ++i) index.emplace(records[i].sample_id, pool_begin + i);
    std::unordered_map<std::string, const EntropyRecord*> record_by_id;
    record_by_id.reserve(n_pool);
    for (const auto& rec : records) record_by_id.emplace(rec.sample_id, &rec);

    const auto n_selected = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(cfg.selection_fraction * static_cast<double>(n_pool))));

    auto subset_records = [&](const std::vector<std::string>& ids) {
        std::vector<EntropyRecord> subset;
        subset.reserve(ids.size());
        for (const auto& id : ids) subset.push_back(*record_by_id.at(id));
        return subset;
    };
    auto lowest_records = [&](std::size_t count) {
        return subset_records(curate(records, CurationConfig::by_lowest_count(count)).kept);
    };

    for (Arm arm : arms) {
        std::vector<EntropyRecord> selected;
        ScheduleMode order_mode = ScheduleMode::random;
        switch (arm) {
            case Arm::full:
                selected = records;
                break;
            case Arm::lowest_n_sorted:
                selected = lowest_records(n_selected);
                order_mode = ScheduleMode::ascending;
                break;
            case Arm::lowest_n_unsorted:
                selected = lowest_records(n_selected);
                break;
            case Arm::random_n: {
                std::vector<std::size_t> pick(records.size());
                for (std::size_t i = 0; i < pick.size(); ++i) pick[i] = i;
                Rng rng(mix_seed(seed, kStreamRandomSelection));
                rng.shuffle(pick);
                pick.resize(std::min(n_selected, pick.size()));
                selected.reserve(pick.size());
                for (std::size_t i : pick) selected.push_back(records[i]);
                break;
            }
            case Arm::accuracy_n: {
                // lowest empirical correctness over k stochastic decodes
                Rng rng(mix_seed(seed, kStreamAccuracyDecodes));
                std::vector<std::pair<double, std::string>> scored;
                scored.reserve(records.size());
                for (std::size_t i = 0; i < records.size(); ++i) {
                    const double p_a = sigmoid(base.score(ds.features[index.at(records[i].sample_id)]));
                    std::size_t hits = 0;
                    for (std::size_t k = 0; k < cfg.accuracy_decodes; ++k) {
                        const Choice decoded = rng.bernoulli(p_a) ? Choice::A : Choice::B;
                        hits += decoded == labeled[i].label ? 1 : 0;
                    }
                    scored.emplace_back(static_cast<double>(hits) / static_cast<double>(cfg.accuracy_decodes),
                                        records[i].sample_id);
                }
                std::sort(scored.begin(), scored.end());
                scored.resize(std::min(n_selected, scored.size()));
                for (const auto& [correctness, id] : scored) selected.push_back(*record_by_id.at(id));
                break;
            }
            case Arm::mid_n:
            case Arm::high_n: {
                const LevelPartition levels = partition_levels(records, n_selected);
                selected = subset_records(arm == Arm::mid_n ? levels.mid : levels.high);
                order_mode = ScheduleMode::ascending;
                break;
            }
            case Arm::scale_5:
            case Arm::scale_15:
            case Arm::scale_50:
            case Arm::scale_100: {
                const double fraction = arm == Arm::scale_5    ? 0.05
                                        : arm == Arm::scale_15 ? 0.15
                                        : arm == Arm::scale_50 ? 0.50
                                                               : 1.0;
                const auto count = std::max<std::size_t>(
                    1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n_pool))));
                selected = lowest_records(std::min(count, records.size()));
                order_mode = ScheduleMode::ascending;
                break;
            }
        }
        const std::uint64_t arm_stream = mix_seed(seed, kStreamArmBase + static_cast<std::uint64_t>(arm));
        const auto schedule = build_schedule(selected, cfg.train_epochs, cfg.batch_size, order_mode, arm_stream);
        outcome.accuracy[arm] =
            train_and_evaluate(cfg, base, schedule, ds, index, eval_begin, mix_seed(arm_stream, 0x7261696eULL));
    }
    return outcome;
}

}  // namespace detail

/// Run every requested arm over every seed and aggregate. Each (arm, seed)
/// cell is deterministic and isolated; `jobs` parallelizes over seeds
/// without affecting any result.
inline ExperimentReport run_ablation(std::span<const Arm> arms, const LabConfig& config,
                                     std::span<const std::uint64_t> seeds, unsigned jobs = 1) {
    config.validate();
    if (seeds.size() < 5) throw validation_error("run_ablation requires at least 5 seeds");

    std::vector<detail::SeedOutcome> outcomes(seeds.size());
    auto run_one = [&](std::size_t i) { outcomes[i] = detail::run_seed(config, seeds[i], arms); };
    if (jobs <= 1 || seeds.size() < 2) {
        for (std::size_t i = 0; i < seeds.size(); ++i) run_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        const unsigned workers = std::min<std::size_t>(jobs, seeds.size());
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < seeds.size(); i = next.fetch_add(1)) run_one(i);
            });
        }
        for (auto& t : pool) t.join();
    }

    ExperimentReport report;
    report.seeds.assign(seeds.begin(), seeds.end());
    for (const auto& o : outcomes) report.probe.push_back(o.probe);

    for (Arm arm : arms) {
        ArmStats st;
        for (const auto& o : outcomes) st.per_seed_accuracy.push_back(o.accuracy.at(arm));
        st.mean = stats::mean(st.per_seed_accuracy);
        st.stddev = stats::sample_stddev(st.per_seed_accuracy);
        report.arms.emplace_back(arm, std::move(st));
    }

    const std::pair<Arm, Arm> pairs[] = {
        {Arm::lowest_n_sorted, Arm::random_n},         {Arm::lowest_n_sorted, Arm::high_n},
        {Arm::lowest_n_sorted, Arm::accuracy_n},       {Arm::lowest_n_sorted, Arm::lowest_n_unsorted},
        {Arm::lowest_n_sorted, Arm::mid_n},            {Arm::scale_15, Arm::scale_100},
    };
    for (const auto& [a, b] : pairs) {
        const ArmStats* sa = report.find(a);
        const ArmStats* sb = report.find(b);
        if (!sa || !sb) continue;
        const auto diff = stats::paired_difference(sa->per_seed_accuracy, sb->per_seed_accuracy);
        report.comparisons.push_back(
            {to_string(a), to_string(b), diff.mean_diff, diff.se_diff, diff.mean_diff > diff.se_diff});
    }
    return report;
}

inline nlohmann::ordered_json report_to_json(const ExperimentReport& report, const LabConfig& config) {
    nlohmann::ordered_json j;
    auto& cfg = j["config"];
    cfg["n_samples"] = config.synth.n_samples;
    cfg["feature_dim"] = config.synth.feature_dim;
    cfg["noise_rate"] = config.synth.noise_rate;
    cfg["margin_scale"] = config.synth.margin_scale;
    cfg["warmup_fraction"] = config.warmup_fraction;
    cfg["pool_fraction"] = config.pool_fraction;
    cfg["warmup_steps"] = config.warmup_steps;
    cfg["warmup_lr"] = config.warmup_lr;
    cfg["train_epochs"] = config.train_epochs;
    cfg["train_lr"] = config.train_lr;
    cfg["batch_size"] = config.batch_size;
    cfg["selection_fraction"] = config.selection_fraction;
    cfg["num_bins"] = config.num_bins;
    cfg["mode"] = to_string(config.mode);
    cfg["scope"] = to_string(config.scope);
    cfg["tail_mode"] = to_string(config.tail_mode);
    cfg["update_rule"] = to_string(config.update_rule);
    cfg["alpha"] = config.reward.alpha;
    cfg["beta"] = config.reward.beta;
    cfg["accuracy_decodes"] = config.accuracy_decodes;

    j["seeds"] = report.seeds;

    auto& probe = j["probe"] = nlohmann::ordered_json::array();
    for (const auto& p : report.probe) {
        nlohmann::ordered_json row;
        row["seed"] = p.seed;
        row["flip_fraction"] = p.flip_fraction;
        if (p.bin_trend_rho) row["bin_trend_rho"] = *p.bin_trend_rho;
        else row["bin_trend_rho"] = nullptr;
        row["noise_p"] = p.noise_defined ? nlohmann::ordered_json(p.noise_p) : nlohmann::ordered_json(nullptr);
        row["flipped_mean_entropy"] = p.flipped_mean_entropy;
        row["clean_mean_entropy"] = p.clean_mean_entropy;
        probe.push_back(std::move(row));
    }

    auto& arms = j["arms"];
    for (const auto& [arm, st] : report.arms) {
        nlohmann::ordered_json row;
        row["mean"] = st.mean;
        row["stddev"] = st.stddev;
        row["per_seed_accuracy"] = st.per_seed_accuracy;
        arms[to_string(arm)] = std::move(row);
    }

    auto& cmp = j["comparisons"] = nlohmann::ordered_json::array();
    for (const auto& c : report.comparisons) {
        nlohmann::ordered_json row;
        row["better"] = c.better;
        row["baseline"] = c.baseline;
        row["mean_diff"] = c.mean_diff;
        row["se_diff"] = c.se_diff;
        row["exceeds_one_se"] = c.exceeds_one_se;
        cmp.push_back(std::move(row));
    }
    return j;
}

}  // namespace entro::lab
