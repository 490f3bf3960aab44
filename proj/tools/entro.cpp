// SPDX-FileCopyrightText: (c) 2026 entro contributors
// SPDX-License-Identifier: Apache-2.0

// entro: entropy-guided curation, curriculum scheduling and rule-based
// rewards for preference datasets, plus a synthetic experiment lab.
//
// Exit codes: 0 success, 1 domain error (bad data, bad config), 2 usage.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "entro/entro.hpp"

namespace {

using namespace entro;

struct GlobalOptions {
    std::string config_path;
    std::uint64_t seed = 1;
    unsigned jobs = 1;
    std::string log_level = "info";
};

bool g_quiet = false;

void info(const std::string& msg) {
    if (!g_quiet) std::cout << msg << "\n";
}

KeyValueConfig load_config_if_any(const std::string& path) {
    if (path.empty()) return {};
    return KeyValueConfig::load(path);
}

// flags win over config values: a config key applies only when the matching
// option was not given on the command line
template <class T, class Fn>
void layer(const CLI::App& app, const std::string& flag, KeyValueConfig& cfg, const std::string& key, T& value,
           Fn&& from_config) {
    if (!cfg.has(key)) return;
    if (app.count(flag) == 0) value = from_config(cfg);
    else cfg.acknowledge(key);
}

void layer_global(const CLI::App& sub, KeyValueConfig& cfg, GlobalOptions& global, const CLI::App& root) {
    layer(root, "--seed", cfg, "seed", global.seed, [](KeyValueConfig& c) { return c.get_uint("seed"); });
    layer(root, "--jobs", cfg, "jobs", global.jobs,
          [](KeyValueConfig& c) { return static_cast<unsigned>(c.get_uint("jobs")); });
    layer(root, "--log-level", cfg, "log_level", global.log_level,
          [](KeyValueConfig& c) { return c.get_string("log_level"); });
    (void)sub;
    g_quiet = global.log_level == "quiet";
}

std::string format_double(double v, const char* fmt = "%.9g") {
    char buf[48];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

// --- score ---------------------------------------------------------------

struct ScoreOptions {
    std::string traces_path;
    std::string out_path;
    std::uint64_t vocab_size = 0;  // 0 = infer from file
    std::string mode = "answer";
    std::string scope = "full_sequence";
    std::string tail = "bucket";
    std::string on_error = "abort";
    bool bits = false;
};

std::uint32_t infer_vocab_size(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw error("cannot open " + path.string());
    std::uint32_t max_id = 0;
    std::size_t max_dense = 0;
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
        if (const auto it = obj.find("tokens"); it != obj.end()) {
            for (const auto& t : *it) max_id = std::max(max_id, t.get<std::uint32_t>());
        }
        if (const auto it = obj.find("distributions"); it != obj.end()) {
            for (const auto& d : *it) {
                const auto probs = d.find("probs");
                if (probs == d.end()) continue;
                max_dense = d.value("kind", "") == "dense" ? std::max(max_dense, probs->size()) : max_dense;
                for (const auto& pair : *probs) {
                    if (pair.is_array() && !pair.empty()) max_id = std::max(max_id, pair[0].get<std::uint32_t>());
                }
            }
        }
    }
    return std::max<std::uint32_t>({2u, max_id + 1, static_cast<std::uint32_t>(max_dense)});
}

int run_score(const ScoreOptions& opt, const GlobalOptions& global) {
    VocabSpec vocab;
    vocab.size = opt.vocab_size > 0 ? static_cast<std::uint32_t>(opt.vocab_size) : infer_vocab_size(opt.traces_path);
    const auto traces = io::load_traces(opt.traces_path, vocab);
    auto records = score_dataset(traces, score_mode_from_string(opt.mode), scope_from_string(opt.scope),
                                 tail_mode_from_string(opt.tail),
                                 opt.on_error == "skip" ? ErrorPolicy::skip_and_log : ErrorPolicy::abort_on_error,
                                 global.jobs);
    if (opt.bits) {
        const double ln2 = std::log(2.0);
        for (auto& rec : records) {
            rec.answer_entropy /= ln2;
            rec.sentence_entropy /= ln2;
            rec.composite = composite_score(rec.answer_entropy, rec.sentence_entropy, rec.mode);
        }
    }
    std::ofstream out(opt.out_path);
    if (!out) throw error("cannot open " + opt.out_path + " for writing");
    for (const auto& rec : records) {
        auto obj = io::record_to_json(rec);
        if (opt.bits) obj["units"] = "bits";
        out << obj.dump() << "\n";
    }
    if (!out) throw error("write failed for " + opt.out_path);
    info("scored " + std::to_string(records.size()) + " of " + std::to_string(traces.size()) + " traces (|V|=" +
         std::to_string(vocab.size) + ") -> " + opt.out_path);
    return 0;
}

// --- curate --------------------------------------------------------------

struct CurateOptions {
    std::string records_path;
    std::optional<double> percentile;
    std::optional<std::uint64_t> lowest_count;
    std::string out_kept = "kept.jsonl";
    std::string out_pruned = "pruned.jsonl";
};

int run_curate(const CurateOptions& opt) {
    const auto records = io::load_records(opt.records_path);
    CurationConfig config;
    if (opt.percentile) config = CurationConfig::by_percentile(*opt.percentile);
    else if (opt.lowest_count) config = CurationConfig::by_lowest_count(*opt.lowest_count);
    else throw config_error("curate needs --percentile or --lowest-count");

    const auto result = curate(records, config);
    std::map<std::string, double> composite;
    for (const auto& rec : records) composite[rec.sample_id] = rec.composite;
    auto rows = [&](const std::vector<std::string>& ids) {
        std::vector<std::pair<std::string, double>> out;
        out.reserve(ids.size());
        for (const auto& id : ids) out.emplace_back(id, composite.at(id));
        return out;
    };
    io::write_selection(opt.out_kept, rows(result.kept));
    io::write_selection(opt.out_pruned, rows(result.pruned));
    info("kept " + std::to_string(result.kept.size()) + ", pruned " + std::to_string(result.pruned.size()) + " -> " +
         opt.out_kept + ", " + opt.out_pruned);
    return 0;
}

// --- bins ----------------------------------------------------------------

struct BinsOptions {
    std::string records_path;
    std::string prefs_path;
    std::uint64_t num_bins = 10;
    bool equal_count = false;
    std::string out_csv = "bins.csv";
    std::string out_svg;
};

int run_bins(const BinsOptions& opt) {
    const auto records = io::load_records(opt.records_path);
    const auto samples = io::load_preferences(opt.prefs_path);
    const auto report = bin_accuracy(records, samples, opt.num_bins,
                                     opt.equal_count ? BinScheme::equal_count : BinScheme::equal_width);

    std::ofstream csv(opt.out_csv);
    if (!csv) throw error("cannot open " + opt.out_csv + " for writing");
    csv << "bin_lo,bin_hi,count,accuracy\n";
    for (std::size_t b = 0; b < report.counts.size(); ++b) {
        csv << format_double(report.edges[b]) << "," << format_double(report.edges[b + 1]) << ","
            << report.counts[b] << ","
            << (report.counts[b] > 0 ? format_double(report.accuracies[b]) : "nan") << "\n";
    }
    if (!csv) throw error("write failed for " + opt.out_csv);

    if (!opt.out_svg.empty()) {
        std::vector<svg::Bar> bars;
        for (std::size_t b = 0; b < report.counts.size(); ++b) {
            bars.push_back({format_double(report.edges[b], "%.2f") + "-" + format_double(report.edges[b + 1], "%.2f"),
                            report.counts[b] > 0 ? report.accuracies[b] : 0.0});
        }
        svg::write_bar_chart(opt.out_svg, bars, "accuracy by entropy bin", "accuracy");
    }
    info("binned " + std::to_string(report.labeled) + " samples -> " + opt.out_csv +
         (report.trend ? " (trend rho=" + format_double(*report.trend, "%.4f") + ")" : " (trend undefined)"));
    return 0;
}

// --- curriculum ----------------------------------------------------------

struct CurriculumOptions {
    std::string records_path;
    std::string mode = "ascending";
    std::uint64_t epochs = 1;
    std::uint64_t batch_size = 32;
    std::string out_path = "schedule.jsonl";
};

int run_curriculum(const CurriculumOptions& opt, const GlobalOptions& global) {
    const auto records = io::load_records(opt.records_path);
    const auto schedule =
        build_schedule(records, opt.epochs, opt.batch_size, schedule_mode_from_string(opt.mode), global.seed);
    emit_schedule(schedule, opt.out_path);
    std::size_t batches = 0;
    for (const auto& epoch : schedule.order) batches += epoch.size();
    info("scheduled " + std::to_string(records.size()) + " samples into " + std::to_string(schedule.epochs) +
         " epoch(s), " + std::to_string(batches) + " batches -> " + opt.out_path);
    return 0;
}

// --- reward --------------------------------------------------------------

struct RewardOptions {
    std::string gold_path;
    std::string outputs_path;
    double alpha = 0.5;
    double beta = 0.5;
    std::string out_path = "rewards.jsonl";
};

int run_reward(const RewardOptions& opt) {
    const auto gold = io::load_preferences(opt.gold_path);
    std::map<std::string, Choice> labels;
    for (const auto& s : gold) labels[s.sample_id] = s.label;

    const RewardConfig cfg{opt.alpha, opt.beta};
    std::ifstream in(opt.outputs_path);
    if (!in) throw error("cannot open " + opt.outputs_path);
    std::ofstream out(opt.out_path);
    if (!out) throw error("cannot open " + opt.out_path + " for writing");

    std::string line;
    std::size_t lineno = 0, written = 0;
    std::set<std::string> seen;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw parse_error(opt.outputs_path + ":" + std::to_string(lineno) + ": malformed JSON: " + e.what());
        }
        if (!obj.contains("sample_id") || !obj.contains("text"))
            throw parse_error(opt.outputs_path + ":" + std::to_string(lineno) +
                              ": expected fields 'sample_id' and 'text'");
        const auto id = obj["sample_id"].get<std::string>();
        if (!seen.insert(id).second)
            throw validation_error(opt.outputs_path + ":" + std::to_string(lineno) + ": duplicate sample_id=" + id);
        const auto label = labels.find(id);
        if (label == labels.end())
            throw validation_error(opt.outputs_path + ":" + std::to_string(lineno) + ": sample_id=" + id +
                                   " not present in " + opt.gold_path);
        const auto parsed = parse_output(obj["text"].get<std::string>());
        const auto terms = reward_terms(parsed, label->second);
        nlohmann::ordered_json row;
        row["sample_id"] = id;
        row["R_acc"] = terms.accuracy;
        row["R_logic"] = terms.logic;
        row["R_format"] = terms.format;
        row["R"] = compute_reward(parsed, label->second, cfg);
        out << row.dump() << "\n";
        ++written;
    }
    if (!out) throw error("write failed for " + opt.out_path);
    info("rewarded " + std::to_string(written) + " outputs -> " + opt.out_path);
    return 0;
}

// --- experiment ----------------------------------------------------------

struct ExperimentOptions {
    lab::LabConfig lab;
    std::uint64_t seed_count = 10;
    std::string arms = "all";
    std::string mode = "answer";
    std::string scope = "full_sequence";
    std::string tail = "bucket";
    std::string update_rule = "reinforce";
    std::string out_path = "report.json";
    std::string svg_path;
    std::string dump_dir;
};

std::vector<lab::Arm> parse_arms(const std::string& names) {
    if (names == "all") return lab::all_arms();
    std::vector<lab::Arm> arms;
    std::string token;
    for (std::size_t i = 0; i <= names.size(); ++i) {
        if (i == names.size() || names[i] == ',') {
            if (!token.empty()) arms.push_back(lab::arm_from_string(token));
            token.clear();
        } else {
            token += names[i];
        }
    }
    if (arms.empty()) throw config_error("no arms requested");
    return arms;
}

void dump_seed_artifacts(const lab::LabConfig& cfg, std::uint64_t seed, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    lab::SyntheticConfig synth = cfg.synth;
    synth.seed = seed;
    const auto ds = lab::generate(synth);
    const auto n = ds.samples.size();
    const auto n_warm = static_cast<std::size_t>(static_cast<double>(n) * cfg.warmup_fraction);
    const auto n_pool = static_cast<std::size_t>(static_cast<double>(n) * cfg.pool_fraction);
    const auto model = lab::warmup(std::span(ds.samples).subspan(0, n_warm),
                                   std::span(ds.features).subspan(0, n_warm), cfg.warmup_steps, cfg.warmup_lr, seed);
    const auto pool_samples = std::span(ds.samples).subspan(n_warm, n_pool);
    const auto pool_features = std::span(ds.features).subspan(n_warm, n_pool);
    const auto traces = lab::probe(model, pool_samples, pool_features);
    std::vector<PreferenceSample> labeled(pool_samples.begin(), pool_samples.end());
    lab::attach_predictions(labeled, traces);
    io::write_traces(dir / "traces.jsonl", traces);
    io::write_preferences(dir / "prefs.jsonl", labeled);
    const auto records = score_dataset(traces, cfg.mode, cfg.scope, cfg.tail_mode);
    io::write_records(dir / "records.jsonl", records);
    info("dumped probe artifacts for seed " + std::to_string(seed) + " -> " + dir.string());
}

int run_experiment(ExperimentOptions& opt, const GlobalOptions& global) {
    opt.lab.mode = score_mode_from_string(opt.mode);
    opt.lab.scope = scope_from_string(opt.scope);
    opt.lab.tail_mode = tail_mode_from_string(opt.tail);
    opt.lab.update_rule = lab::update_rule_from_string(opt.update_rule);

    const auto arms = parse_arms(opt.arms);
    std::vector<std::uint64_t> seeds(opt.seed_count);
    for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = global.seed + i;

    const auto report = lab::run_ablation(arms, opt.lab, seeds, global.jobs);

    std::ofstream out(opt.out_path);
    if (!out) throw error("cannot open " + opt.out_path + " for writing");
    out << lab::report_to_json(report, opt.lab).dump(2) << "\n";
    if (!out) throw error("write failed for " + opt.out_path);

    if (!opt.svg_path.empty()) {
        std::vector<svg::CurvePoint> points;
        const std::pair<lab::Arm, const char*> scale_arms[] = {{lab::Arm::scale_5, "5%"},
                                                               {lab::Arm::scale_15, "15%"},
                                                               {lab::Arm::scale_50, "50%"},
                                                               {lab::Arm::scale_100, "100%"}};
        for (const auto& [arm, label] : scale_arms) {
            if (const auto* st = report.find(arm)) points.push_back({label, st->mean, st->stddev});
        }
        svg::write_curve_chart(opt.svg_path, points, "held-out accuracy by lowest-entropy data fraction",
                               "accuracy");
    }
    if (!opt.dump_dir.empty()) dump_seed_artifacts(opt.lab, seeds.front(), opt.dump_dir);

    for (const auto& [arm, st] : report.arms) {
        info(std::string("arm ") + lab::to_string(arm) + ": mean=" + format_double(st.mean, "%.4f") +
             " std=" + format_double(st.stddev, "%.4f"));
    }
    info("report -> " + opt.out_path);
    return 0;
}

// --- validate ------------------------------------------------------------

struct ValidateOptions {
    std::string traces_path;
    std::string prefs_path;
    std::uint64_t vocab_size = 0;
};

int run_validate(const ValidateOptions& opt) {
    if (opt.traces_path.empty() && opt.prefs_path.empty())
        throw config_error("validate needs --traces and/or --prefs");
    if (!opt.traces_path.empty()) {
        VocabSpec vocab;
        vocab.size =
            opt.vocab_size > 0 ? static_cast<std::uint32_t>(opt.vocab_size) : infer_vocab_size(opt.traces_path);
        const auto traces = io::load_traces(opt.traces_path, vocab);
        info("traces: " + std::to_string(traces.size()) + " records OK (|V|=" + std::to_string(vocab.size) + ")");
    }
    if (!opt.prefs_path.empty()) {
        const auto prefs = io::load_preferences(opt.prefs_path);
        info("preferences: " + std::to_string(prefs.size()) + " records OK");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"entropy-guided dataset curation, curriculum scheduling and rule-based rewards"};
    app.require_subcommand(1);
    app.fallthrough();  // global options (--seed, --jobs, ...) may follow the subcommand

    GlobalOptions global;
    app.add_option("--config", global.config_path, "flat key=value config file, layered under flags")
        ->envname("ENTRO_CONFIG");
    app.add_option("--seed", global.seed, "base seed; all randomness derives from it")->envname("ENTRO_SEED");
    app.add_option("--jobs", global.jobs, "worker threads for score/experiment")->envname("ENTRO_JOBS");
    app.add_option("--log-level", global.log_level, "quiet|info|debug")
        ->check(CLI::IsMember({"quiet", "info", "debug"}))
        ->envname("ENTRO_LOG_LEVEL");

    ScoreOptions score_opt;
    auto* score = app.add_subcommand("score", "score traces into entropy records");
    score->add_option("--traces", score_opt.traces_path, "trace JSONL file")->required()->check(CLI::ExistingFile);
    score->add_option("--out", score_opt.out_path, "entropy record JSONL output")->required();
    score->add_option("--vocab-size", score_opt.vocab_size, "vocabulary size |V| (default: inferred)");
    score->add_option("--mode", score_opt.mode, "composite score design")
        ->check(CLI::IsMember({"answer", "sentence", "mix"}));
    score->add_option("--scope", score_opt.scope, "positions averaged by the sentence entropy")
        ->check(CLI::IsMember({"full_sequence", "reasoning_span"}));
    score->add_option("--tail", score_opt.tail, "top-k tail handling")
        ->check(CLI::IsMember({"bucket", "uniform"}));
    score->add_flag("--bits", score_opt.bits, "report entropies in bits instead of nats");
    score->add_option("--on-error", score_opt.on_error, "abort|skip invalid traces")
        ->check(CLI::IsMember({"abort", "skip"}));

    CurateOptions curate_opt;
    double percentile_arg = 0.0;
    std::uint64_t lowest_arg = 0;
    auto* curate_cmd = app.add_subcommand("curate", "prune records by entropy");
    curate_cmd->add_option("--records", curate_opt.records_path, "entropy record JSONL file")
        ->required()
        ->check(CLI::ExistingFile);
    auto* pct = curate_cmd->add_option("--percentile", percentile_arg, "keep composite strictly below the p-th percentile");
    auto* low = curate_cmd->add_option("--lowest-count", lowest_arg, "keep the n lowest-composite records");
    pct->excludes(low);
    curate_cmd->add_option("--out-kept", curate_opt.out_kept, "kept ids output");
    curate_cmd->add_option("--out-pruned", curate_opt.out_pruned, "pruned ids output");

    BinsOptions bins_opt;
    auto* bins_cmd = app.add_subcommand("bins", "entropy-bin accuracy report");
    bins_cmd->add_option("--records", bins_opt.records_path, "entropy record JSONL file")
        ->required()
        ->check(CLI::ExistingFile);
    bins_cmd->add_option("--prefs", bins_opt.prefs_path, "preference JSONL with predicted labels")
        ->required()
        ->check(CLI::ExistingFile);
    bins_cmd->add_option("--num-bins", bins_opt.num_bins, "number of bins");
    bins_cmd->add_flag("--equal-count", bins_opt.equal_count, "equal-count bins instead of equal-width");
    bins_cmd->add_option("--out-csv", bins_opt.out_csv, "CSV output");
    bins_cmd->add_option("--out-svg", bins_opt.out_svg, "optional SVG bar chart");

    CurriculumOptions curriculum_opt;
    auto* curriculum_cmd = app.add_subcommand("curriculum", "emit a training schedule");
    curriculum_cmd->add_option("--records", curriculum_opt.records_path, "entropy record JSONL file")
        ->required()
        ->check(CLI::ExistingFile);
    curriculum_cmd->add_option("--mode", curriculum_opt.mode, "ascending|random")
        ->check(CLI::IsMember({"ascending", "random"}));
    curriculum_cmd->add_option("--epochs", curriculum_opt.epochs, "number of epochs");
    curriculum_cmd->add_option("--batch-size", curriculum_opt.batch_size, "ids per batch");
    curriculum_cmd->add_option("--out", curriculum_opt.out_path, "schedule JSONL output");

    RewardOptions reward_opt;
    auto* reward_cmd = app.add_subcommand("reward", "score structured outputs with the rule-based reward");
    reward_cmd->add_option("--gold-file", reward_opt.gold_path, "preference JSONL with gold labels")
        ->required()
        ->check(CLI::ExistingFile);
    reward_cmd->add_option("--outputs", reward_opt.outputs_path, "JSONL of {sample_id, text} model outputs")
        ->required()
        ->check(CLI::ExistingFile);
    reward_cmd->add_option("--alpha", reward_opt.alpha, "logic term weight");
    reward_cmd->add_option("--beta", reward_opt.beta, "format term weight");
    reward_cmd->add_option("--out", reward_opt.out_path, "per-sample reward JSONL output");

    ExperimentOptions exp_opt;
    auto* exp_cmd = app.add_subcommand("experiment", "synthetic curation/curriculum ablation");
    exp_cmd->add_option("--n-samples", exp_opt.lab.synth.n_samples, "synthetic dataset size");
    exp_cmd->add_option("--feature-dim", exp_opt.lab.synth.feature_dim, "feature dimension");
    exp_cmd->add_option("--noise-rate", exp_opt.lab.synth.noise_rate, "label flip probability in [0, 0.5)");
    exp_cmd->add_option("--margin-scale", exp_opt.lab.synth.margin_scale, "latent margin of clear samples");
    exp_cmd->add_option("--seeds", exp_opt.seed_count, "number of seeds (base .. base+n-1)");
    exp_cmd->add_option("--selection-fraction", exp_opt.lab.selection_fraction, "selected fraction of the pool");
    exp_cmd->add_option("--warmup-fraction", exp_opt.lab.warmup_fraction, "fraction used for warmup");
    exp_cmd->add_option("--pool-fraction", exp_opt.lab.pool_fraction, "fraction probed and trained on");
    exp_cmd->add_option("--warmup-steps", exp_opt.lab.warmup_steps, "warmup SGD steps");
    exp_cmd->add_option("--warmup-lr", exp_opt.lab.warmup_lr, "warmup learning rate");
    exp_cmd->add_option("--train-epochs", exp_opt.lab.train_epochs, "continue-training epochs");
    exp_cmd->add_option("--train-lr", exp_opt.lab.train_lr, "continue-training learning rate");
    exp_cmd->add_option("--batch-size", exp_opt.lab.batch_size, "schedule batch size");
    exp_cmd->add_option("--update-rule", exp_opt.update_rule, "reinforce|nll continue-training rule")
        ->check(CLI::IsMember({"reinforce", "nll"}));
    exp_cmd->add_option("--accuracy-decodes", exp_opt.lab.accuracy_decodes, "decodes per sample for accuracy_n");
    exp_cmd->add_option("--num-bins", exp_opt.lab.num_bins, "bins for the entropy/accuracy trend");
    exp_cmd->add_option("--mode", exp_opt.mode, "composite score design")
        ->check(CLI::IsMember({"answer", "sentence", "mix"}));
    exp_cmd->add_option("--scope", exp_opt.scope, "sentence entropy scope")
        ->check(CLI::IsMember({"full_sequence", "reasoning_span"}));
    exp_cmd->add_option("--tail", exp_opt.tail, "top-k tail handling")->check(CLI::IsMember({"bucket", "uniform"}));
    exp_cmd->add_option("--alpha", exp_opt.lab.reward.alpha, "reward logic weight");
    exp_cmd->add_option("--beta", exp_opt.lab.reward.beta, "reward format weight");
    exp_cmd->add_option("--arms", exp_opt.arms, "comma-separated arm list, or 'all'");
    exp_cmd->add_option("--out", exp_opt.out_path, "report JSON output");
    exp_cmd->add_option("--svg", exp_opt.svg_path, "optional accuracy-vs-scale SVG");
    exp_cmd->add_option("--dump-dir", exp_opt.dump_dir, "write first-seed probe artifacts (traces/prefs/records)");

    ValidateOptions validate_opt;
    auto* validate_cmd = app.add_subcommand("validate", "check trace/preference files");
    validate_cmd->add_option("--traces", validate_opt.traces_path, "trace JSONL file")->check(CLI::ExistingFile);
    validate_cmd->add_option("--prefs", validate_opt.prefs_path, "preference JSONL file")->check(CLI::ExistingFile);
    validate_cmd->add_option("--vocab-size", validate_opt.vocab_size, "vocabulary size |V| (default: inferred)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        KeyValueConfig cfg = load_config_if_any(global.config_path);
        CLI::App* sub = app.get_subcommands().front();
        layer_global(*sub, cfg, global, app);

        int rc = 1;
        if (sub == score) {
            layer(*score, "--mode", cfg, "mode", score_opt.mode,
                  [](KeyValueConfig& c) { return c.get_string("mode"); });
            layer(*score, "--scope", cfg, "scope", score_opt.scope,
                  [](KeyValueConfig& c) { return c.get_string("scope"); });
            layer(*score, "--tail", cfg, "tail_mode", score_opt.tail,
                  [](KeyValueConfig& c) { return c.get_string("tail_mode"); });
            cfg.finish();
            rc = run_score(score_opt, global);
        } else if (sub == curate_cmd) {
            cfg.finish();
            if (curate_cmd->count("--percentile")) curate_opt.percentile = percentile_arg;
            if (curate_cmd->count("--lowest-count")) curate_opt.lowest_count = lowest_arg;
            rc = run_curate(curate_opt);
        } else if (sub == bins_cmd) {
            cfg.finish();
            rc = run_bins(bins_opt);
        } else if (sub == curriculum_cmd) {
            cfg.finish();
            rc = run_curriculum(curriculum_opt, global);
        } else if (sub == reward_cmd) {
            layer(*reward_cmd, "--alpha", cfg, "alpha", reward_opt.alpha,
                  [](KeyValueConfig& c) { return c.get_double("alpha"); });
            layer(*reward_cmd, "--beta", cfg, "beta", reward_opt.beta,
                  [](KeyValueConfig& c) { return c.get_double("beta"); });
            cfg.finish();
            rc = run_reward(reward_opt);
        } else if (sub == exp_cmd) {
            layer(*exp_cmd, "--n-samples", cfg, "n_samples", exp_opt.lab.synth.n_samples,
                  [](KeyValueConfig& c) { return static_cast<std::size_t>(c.get_uint("n_samples")); });
            layer(*exp_cmd, "--feature-dim", cfg, "feature_dim", exp_opt.lab.synth.feature_dim,
                  [](KeyValueConfig& c) { return static_cast<std::size_t>(c.get_uint("feature_dim")); });
            layer(*exp_cmd, "--noise-rate", cfg, "noise_rate", exp_opt.lab.synth.noise_rate,
                  [](KeyValueConfig& c) { return c.get_double("noise_rate"); });
            layer(*exp_cmd, "--margin-scale", cfg, "margin_scale", exp_opt.lab.synth.margin_scale,
                  [](KeyValueConfig& c) { return c.get_double("margin_scale"); });
            layer(*exp_cmd, "--seeds", cfg, "seeds", exp_opt.seed_count,
                  [](KeyValueConfig& c) { return c.get_uint("seeds"); });
            layer(*exp_cmd, "--selection-fraction", cfg, "selection_fraction", exp_opt.lab.selection_fraction,
                  [](KeyValueConfig& c) { return c.get_double("selection_fraction"); });
            layer(*exp_cmd, "--warmup-fraction", cfg, "warmup_fraction", exp_opt.lab.warmup_fraction,
                  [](KeyValueConfig& c) { return c.get_double("warmup_fraction"); });
            layer(*exp_cmd, "--pool-fraction", cfg, "pool_fraction", exp_opt.lab.pool_fraction,
                  [](KeyValueConfig& c) { return c.get_double("pool_fraction"); });
            layer(*exp_cmd, "--warmup-steps", cfg, "warmup_steps", exp_opt.lab.warmup_steps,
                  [](KeyValueConfig& c) { return static_cast<std::size_t>(c.get_uint("warmup_steps")); });
            layer(*exp_cmd, "--warmup-lr", cfg, "warmup_lr", exp_opt.lab.warmup_lr,
                  [](KeyValueConfig& c) { return c.get_double("warmup_lr"); });
            layer(*exp_cmd, "--train-epochs", cfg, "train_epochs", exp_opt.lab.train_epochs,
                  [](KeyValueConfig& c) { return static_cast<std::size_t>(c.get_uint("train_epochs")); });
            layer(*exp_cmd, "--train-lr", cfg, "train_lr", exp_opt.lab.train_lr,
                  [](KeyValueConfig& c) { return c.get_double("train_lr"); });
            layer(*exp_cmd, "--batch-size", cfg, "batch_size", exp_opt.lab.batch_size,
                  [](KeyValueConfig& c) { return static_cast<std::size_t>(c.get_uint("batch_size")); });
            layer(*exp_cmd, "--update-rule", cfg, "update_rule", exp_opt.update_rule,
                  [](KeyValueConfig& c) { return c.get_string("update_rule"); });
            layer(*exp_cmd, "--accuracy-decodes", cfg, "accuracy_decodes", exp_opt.lab.accuracy_decodes,
                  [](KeyValueConfig& c) { return static_cast<std::size_t>(c.get_uint("accuracy_decodes")); });
            layer(*exp_cmd, "--num-bins", cfg, "num_bins", exp_opt.lab.num_bins,
                  [](KeyValueConfig& c) { return static_cast<std::size_t>(c.get_uint("num_bins")); });
            layer(*exp_cmd, "--mode", cfg, "mode", exp_opt.mode,
                  [](KeyValueConfig& c) { return c.get_string("mode"); });
            layer(*exp_cmd, "--scope", cfg, "scope", exp_opt.scope,
                  [](KeyValueConfig& c) { return c.get_string("scope"); });
            layer(*exp_cmd, "--tail", cfg, "tail_mode", exp_opt.tail,
                  [](KeyValueConfig& c) { return c.get_string("tail_mode"); });
            layer(*exp_cmd, "--alpha", cfg, "alpha", exp_opt.lab.reward.alpha,
                  [](KeyValueConfig& c) { return c.get_double("alpha"); });
            layer(*exp_cmd, "--beta", cfg, "beta", exp_opt.lab.reward.beta,
                  [](KeyValueConfig& c) { return c.get_double("beta"); });
            layer(*exp_cmd, "--arms", cfg, "arms", exp_opt.arms,
                  [](KeyValueConfig& c) { return c.get_string("arms"); });
            cfg.finish();
            rc = run_experiment(exp_opt, global);
        } else if (sub == validate_cmd) {
            cfg.finish();
            rc = run_validate(validate_opt);
        }
        return rc;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
