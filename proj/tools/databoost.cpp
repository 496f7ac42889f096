// Copyright 2026 The databoost Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line entry point. Every subcommand resolves one flat key=value
// configuration (file, then --set overrides, then dedicated flags), rejects
// unknown keys, and writes the merged configuration next to its outputs.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "databoost/augment.hpp"
#include "databoost/config.hpp"
#include "databoost/corpus.hpp"
#include "databoost/error.hpp"
#include "databoost/eval.hpp"
#include "databoost/guide.hpp"
#include "databoost/kernels.hpp"
#include "databoost/lm.hpp"
#include "databoost/ngram.hpp"
#include "databoost/salience.hpp"

namespace fs = std::filesystem;
using namespace databoost;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitPartial = 4;

struct Flags {
    std::string config;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> jobs;
    std::string out;
    bool dry_run = false;
    bool yes = false;
};

// Everything a command may need, read in one pass so unknown keys are
// detected regardless of which command runs.
struct RunConfig {
    std::string data;
    std::string data_format;
    std::string eval_data;
    std::string out = "out";
    std::string lexicon;
    std::string checkpoint;
    std::string vocab;
    std::uint64_t seed = 1;
    std::size_t jobs = 1;

    PreprocessConfig pre = PreprocessConfig::standard();
    std::string stopwords = "builtin";
    std::size_t vocab_min_count = 1;
    TrainConfig train;
    std::size_t lexicon_size = 20;
    std::size_t lexicon_min_count = 2;
    GuideConfig guide;
    std::size_t boost_full_size = 0;
    double boost_train_fraction = 0.0;
    std::size_t max_attempts = 10;
    bool dedup = true;
    bool diagnostics = true;
    ExperimentConfig exp;
    SynthConfig synth;
    std::size_t ngram_order = 3;

    KeyValues effective() const;
};

RunConfig read_run_config(const KeyValues& kv) {
    RunConfig rc;
    ConfigReader r(kv);
    rc.data = r.text("data", "");
    rc.data_format = r.text("data.format", "");
    rc.eval_data = r.text("eval_data", "");
    rc.out = r.text("out", rc.out);
    rc.lexicon = r.text("lexicon", "");
    rc.checkpoint = r.text("checkpoint", "");
    rc.vocab = r.text("vocab", "");
    rc.seed = r.u64("seed", rc.seed);
    rc.jobs = r.count("jobs", rc.jobs);
    if (rc.jobs < 1) r.error("jobs must be >= 1");

    rc.pre.max_tokens = r.count("pre.max_tokens", rc.pre.max_tokens);
    rc.pre.strip_punctuation = r.flag("pre.strip_punctuation", rc.pre.strip_punctuation);
    rc.pre.strip_hashtags = r.flag("pre.strip_hashtags", rc.pre.strip_hashtags);
    rc.pre.strip_urls = r.flag("pre.strip_urls", rc.pre.strip_urls);
    rc.stopwords = r.text("pre.stopwords", rc.stopwords);
    rc.vocab_min_count = r.count("vocab.min_count", rc.vocab_min_count);

    rc.train.epochs = r.count("train.epochs", rc.train.epochs);
    rc.train.batch_size = r.count("train.batch_size", rc.train.batch_size);
    rc.train.learning_rate = r.real("train.learning_rate", rc.train.learning_rate);
    rc.train.grad_clip = r.real("train.grad_clip", rc.train.grad_clip);
    rc.train.holdout_fraction = r.real("train.holdout_fraction", rc.train.holdout_fraction);
    rc.train.model.d_model = r.count("lm.d_model", rc.train.model.d_model);
    rc.train.model.n_layers = r.count("lm.n_layers", rc.train.model.n_layers);
    rc.train.model.n_heads = r.count("lm.n_heads", rc.train.model.n_heads);
    rc.train.model.context = r.count("lm.context", rc.train.model.context);
    rc.train.model.d_ff = r.count("lm.d_ff", rc.train.model.d_ff);

    rc.lexicon_size = r.count("lexicon.size", rc.lexicon_size);
    rc.lexicon_min_count = r.count("lexicon.min_count", rc.lexicon_min_count);
    rc.guide.read(r);
    rc.boost_full_size = r.count("boost.full_size", rc.boost_full_size);
    rc.boost_train_fraction = r.real("boost.train_fraction", rc.boost_train_fraction);
    rc.max_attempts = r.count("boost.max_attempts", rc.max_attempts);
    rc.dedup = r.flag("boost.dedup", rc.dedup);
    rc.diagnostics = r.flag("boost.diagnostics", rc.diagnostics);
    rc.exp.read(r);
    rc.synth.read(r);
    rc.ngram_order = r.count("ngram.order", rc.ngram_order);

    if (!rc.data_format.empty() && !parse_data_format(rc.data_format)) {
        r.error("data.format must be jsonl, csv or tsv");
    }
    if (rc.stopwords == "none") {
        rc.pre.stopwords.clear();
    } else if (rc.stopwords != "builtin") {
        try {
            rc.pre.stopwords = load_stopwords(rc.stopwords);
        } catch (const Error& e) {
            r.error(std::string("pre.stopwords: ") + e.what());
        }
    }
    if (rc.ngram_order < 1 || rc.ngram_order > 5) r.error("ngram.order must be in 1..5");
    if (rc.boost_train_fraction < 0.0 || rc.boost_train_fraction > 1.0) {
        r.error("boost.train_fraction must be in [0, 1]");
    }
    try {
        rc.guide.validate();
    } catch (const Error& e) {
        r.error(e.what());
    }
    try {
        rc.exp.validate();
    } catch (const Error& e) {
        r.error(e.what());
    }
    // The experiment shares the run-wide seed and worker count.
    rc.exp.seed = rc.seed;
    rc.exp.jobs = rc.jobs;
    rc.train.seed = rc.seed;
    r.finish(true);
    return rc;
}

KeyValues RunConfig::effective() const {
    KeyValues kv;
    kv["data"] = data;
    kv["data.format"] = data_format;
    kv["eval_data"] = eval_data;
    kv["out"] = out;
    kv["lexicon"] = lexicon;
    kv["checkpoint"] = checkpoint;
    kv["vocab"] = vocab;
    kv["seed"] = std::to_string(seed);
    kv["jobs"] = std::to_string(jobs);
    kv["pre.max_tokens"] = std::to_string(pre.max_tokens);
    kv["pre.strip_punctuation"] = pre.strip_punctuation ? "true" : "false";
    kv["pre.strip_hashtags"] = pre.strip_hashtags ? "true" : "false";
    kv["pre.strip_urls"] = pre.strip_urls ? "true" : "false";
    kv["pre.stopwords"] = stopwords;
    kv["vocab.min_count"] = std::to_string(vocab_min_count);
    kv["train.epochs"] = std::to_string(train.epochs);
    kv["train.batch_size"] = std::to_string(train.batch_size);
    kv["train.learning_rate"] = format_real(train.learning_rate);
    kv["train.grad_clip"] = format_real(train.grad_clip);
    kv["train.holdout_fraction"] = format_real(train.holdout_fraction);
    kv["lm.d_model"] = std::to_string(train.model.d_model);
    kv["lm.n_layers"] = std::to_string(train.model.n_layers);
    kv["lm.n_heads"] = std::to_string(train.model.n_heads);
    kv["lm.context"] = std::to_string(train.model.context);
    kv["lm.d_ff"] = std::to_string(train.model.d_ff);
    kv["lexicon.size"] = std::to_string(lexicon_size);
    kv["lexicon.min_count"] = std::to_string(lexicon_min_count);
    guide.write(kv);
    kv["boost.full_size"] = std::to_string(boost_full_size);
    kv["boost.train_fraction"] = format_real(boost_train_fraction);
    kv["boost.max_attempts"] = std::to_string(max_attempts);
    kv["boost.dedup"] = dedup ? "true" : "false";
    kv["boost.diagnostics"] = diagnostics ? "true" : "false";
    exp.write(kv);
    kv.erase("exp.seed");
    synth.write(kv);
    kv["ngram.order"] = std::to_string(ngram_order);
    return kv;
}

KeyValues merged_key_values(const Flags& f) {
    KeyValues kv;
    if (!f.config.empty()) kv = load_key_values(f.config);
    for (const auto& s : f.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw Error(ErrorCode::kConfig, "--set expects key=value, got '" + s + "'");
        }
        auto one = parse_key_values(s);
        for (auto& [k, v] : one) kv[k] = v;
    }
    if (f.seed) kv["seed"] = std::to_string(*f.seed);
    if (f.jobs) kv["jobs"] = std::to_string(*f.jobs);
    if (!f.out.empty()) kv["out"] = f.out;
    return kv;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

// Output directory, merged config and a metadata sidecar that holds the
// only non-deterministic bytes (timestamp and wall time).
class OutputDir {
  public:
    OutputDir(const RunConfig& rc, std::string command) : dir_(rc.out), command_(std::move(command)) {
        fs::create_directories(dir_);
        write_text(dir_ / "config.txt", "# effective configuration for '" + command_ + "'\n" +
                                            format_key_values(rc.effective()));
    }
    fs::path operator/(const std::string& name) const { return dir_ / name; }
    void finish(int exit_code) const {
        nlohmann::json meta;
        meta["command"] = command_;
        meta["version"] = version_string();
        meta["kernels"] = std::string(kernels::isa_name(kernels::active_isa()));
        meta["exit_code"] = exit_code;
        meta["finished_at"] = static_cast<long long>(std::time(nullptr));
        meta["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        write_text(dir_ / "run_meta.json", meta.dump(2) + "\n");
    }

  private:
    fs::path dir_;
    std::string command_;
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void require_file(const std::string& key, const std::string& path) {
    if (path.empty()) throw Error(ErrorCode::kConfig, "'" + key + "' is required for this command");
    if (!fs::is_regular_file(path)) throw Error(ErrorCode::kConfig, key + ": no such file '" + path + "'");
}

Dataset load_data(const RunConfig& rc, const std::string& key, const std::string& path) {
    require_file(key, path);
    const DataFormat fmt = rc.data_format.empty() ? format_from_path(path) : *parse_data_format(rc.data_format);
    return ingest(path, fmt);
}

void log(const std::string& msg) { std::fprintf(stderr, "databoost: %s\n", msg.c_str()); }

// ---------------------------------------------------------------- commands

int cmd_synth(const RunConfig& rc, const Flags& f) {
    if (f.dry_run) {
        std::printf("would write %zu synthetic rows (%zu classes) to %s\n", rc.synth.examples, rc.synth.num_classes,
                    (fs::path(rc.out) / "synth.jsonl").c_str());
        return kExitOk;
    }
    OutputDir out(rc, "synth");
    const Dataset ds = synth_corpus(rc.synth);
    write_jsonl(ds, out / "synth.jsonl");
    std::printf("wrote %zu rows to %s\n", ds.size(), (out / "synth.jsonl").c_str());
    out.finish(kExitOk);
    return kExitOk;
}

int cmd_ingest(const RunConfig& rc, const Flags& f) {
    const Dataset ds = load_data(rc, "data", rc.data);
    const auto [train, test] = split_stratified(ds, rc.exp.test_fraction, rc.seed);
    const auto counts = ds.class_counts();
    for (std::size_t c = 0; c < ds.num_classes(); ++c) std::printf("%s\t%zu\n", ds.classes()[c].c_str(), counts[c]);
    std::printf("split: %zu train / %zu test\n", train.size(), test.size());
    if (f.dry_run) return kExitOk;
    OutputDir out(rc, "ingest");
    write_jsonl(ds, out / "data.jsonl");
    write_jsonl(train, out / "train.jsonl");
    write_jsonl(test, out / "test.jsonl");
    out.finish(kExitOk);
    return kExitOk;
}

int cmd_lexicon(const RunConfig& rc, const Flags& f) {
    const Dataset ds = load_data(rc, "data", rc.data);
    std::optional<Vocab> vocab;
    if (!rc.vocab.empty()) {
        require_file("vocab", rc.vocab);
        vocab = Vocab::load(rc.vocab);
    }
    const Lexicon lex = build_lexicon(count_tokens(ds, rc.pre), rc.lexicon_size, rc.lexicon_min_count,
                                      vocab ? &*vocab : nullptr);
    std::printf("%s", lex.to_tsv().c_str());
    if (f.dry_run) return kExitOk;
    OutputDir out(rc, "lexicon");
    lex.save(out / "lexicon.tsv");
    out.finish(kExitOk);
    return kExitOk;
}

int cmd_train_lm(const RunConfig& rc, const Flags& f) {
    const Dataset ds = load_data(rc, "data", rc.data);
    const Vocab vocab = build_vocab(ds, rc.pre, rc.vocab_min_count);
    std::printf("vocabulary: %zu tokens; model d=%zu layers=%zu heads=%zu context=%zu; %zu epochs\n", vocab.size(),
                rc.train.model.d_model, rc.train.model.n_layers, rc.train.model.n_heads, rc.train.model.context,
                rc.train.epochs);
    if (f.dry_run) return kExitOk;
    OutputDir out(rc, "train-lm");
    TrainStats stats;
    const LmModel model = train_lm(ds, vocab, rc.pre, rc.train, &stats);
    vocab.save(out / "vocab.txt");
    model.save(out / "lm.bin");
    std::printf("held-out loss %.4f -> %.4f over %zu steps\n", stats.initial_loss, stats.final_loss, stats.steps);
    out.finish(kExitOk);
    return kExitOk;
}

bool confirm(const Flags& f) {
    if (f.yes) return true;
    std::printf("proceed? [y/N] ");
    std::fflush(stdout);
    std::string answer;
    if (!std::getline(std::cin, answer)) return false;
    return answer == "y" || answer == "Y" || answer == "yes";
}

int cmd_boost(const RunConfig& rc, const Flags& f) {
    const Dataset starved = load_data(rc, "data", rc.data);
    require_file("checkpoint", rc.checkpoint);
    require_file("vocab", rc.vocab);
    if (rc.boost_full_size == 0 && rc.boost_train_fraction <= 0.0) {
        throw Error(ErrorCode::kConfig, "set boost.full_size (rows) or boost.train_fraction (starved share)");
    }
    std::size_t full = rc.boost_full_size;
    if (full == 0) {
        full = static_cast<std::size_t>(std::llround(static_cast<double>(starved.size()) / rc.boost_train_fraction));
    }
    BoostPlan plan = plan_boost(starved, full, class_distribution(starved));
    plan.guide = rc.guide;
    plan.max_attempts = rc.max_attempts;
    plan.dedup = rc.dedup ? DedupPolicy::kExactMatch : DedupPolicy::kNone;
    plan.seed = rc.seed;
    std::printf("%s", plan.to_table(starved).c_str());
    if (f.dry_run) return kExitOk;
    if (!confirm(f)) {
        log("aborted; pass --yes to skip confirmation");
        return kExitRuntime;
    }

    const Vocab vocab = Vocab::load(rc.vocab);
    const LmModel model = LmModel::load(rc.checkpoint);
    if (model.config.vocab_size != vocab.size()) {
        throw Error(ErrorCode::kConfig, "checkpoint vocabulary size does not match the vocab file");
    }
    Lexicon lexicon;
    if (!rc.lexicon.empty()) {
        require_file("lexicon", rc.lexicon);
        lexicon = Lexicon::load(rc.lexicon);
    } else {
        lexicon = build_lexicon(count_tokens(starved, rc.pre), rc.lexicon_size, rc.lexicon_min_count, &vocab);
    }
    OutputDir out(rc, "boost");
    BoostOptions opts;
    opts.jobs = rc.jobs;
    opts.collect_diagnostics = rc.diagnostics;
    const BoostResult res = boost(starved, plan, model, vocab, lexicon, opts);
    write_jsonl(res.data, out / "boosted.jsonl");
    if (rc.diagnostics) write_text(out / "diagnostics.jsonl", res.diagnostics);
    lexicon.save(out / "lexicon.tsv");
    for (const auto& w : res.warnings) log("warning: " + w);
    std::printf("wrote %zu rows (%zu generated, %zu attempts) to %s\n", res.data.size(),
                res.data.size() - starved.size(), res.attempts, (out / "boosted.jsonl").c_str());
    const int code = res.partial ? kExitPartial : kExitOk;
    out.finish(code);
    return code;
}

// Loads the generator for experiments, training one on the train split when
// no checkpoint is configured.
struct Generator {
    Vocab vocab;
    LmModel model;
};

Generator experiment_generator(const RunConfig& rc, const Dataset& ds, const OutputDir& out) {
    Generator g;
    if (!rc.checkpoint.empty()) {
        require_file("checkpoint", rc.checkpoint);
        require_file("vocab", rc.vocab);
        g.vocab = Vocab::load(rc.vocab);
        g.model = LmModel::load(rc.checkpoint);
        return g;
    }
    const Dataset train = experiment_split(ds, rc.exp).first;
    g.vocab = build_vocab(train, rc.pre, rc.vocab_min_count);
    log("no checkpoint configured; training the generator on the train split");
    g.model = train_lm(train, g.vocab, rc.pre, rc.train);
    g.vocab.save(out / "vocab.txt");
    g.model.save(out / "lm.bin");
    return g;
}

int finish_report(const ExperimentReport& rep, const OutputDir& out) {
    write_text(out / "report.tsv", rep.to_tsv());
    write_text(out / "summary.txt", rep.summary());
    std::printf("%s", rep.summary().c_str());
    bool partial = false;
    for (const auto& r : rep.rows) partial |= r.partial;
    const int code = partial ? kExitPartial : kExitOk;
    out.finish(code);
    return code;
}

int cmd_eval_starve(const RunConfig& rc, const Flags& f) {
    const Dataset ds = load_data(rc, "data", rc.data);
    std::size_t methods = rc.exp.run_unboosted + rc.exp.run_databoost + rc.exp.run_naive;
    std::printf("starvation: %zu fractions x %zu repeats x %zu methods x %zu architectures = %zu runs\n",
                rc.exp.fractions.size(), rc.exp.repeats, methods, rc.exp.archs.size(),
                rc.exp.fractions.size() * rc.exp.repeats * methods * rc.exp.archs.size());
    if (f.dry_run) return kExitOk;
    OutputDir out(rc, "eval-starve");
    Generator g;
    if (rc.exp.run_databoost) g = experiment_generator(rc, ds, out);
    const ExperimentReport rep =
        starvation_experiment(ds, rc.exp, rc.pre, rc.exp.run_databoost ? GeneratorModel{&g.model, &g.vocab} : GeneratorModel{});
    return finish_report(rep, out);
}

int cmd_eval_ratio(const RunConfig& rc, const Flags& f) {
    const Dataset ds = load_data(rc, "data", rc.data);
    std::printf("ratio: %zu ratios x %zu repeats x %zu architectures\n", rc.exp.ratios.size(), rc.exp.repeats,
                rc.exp.archs.size());
    if (f.dry_run) return kExitOk;
    OutputDir out(rc, "eval-ratio");
    Generator g = experiment_generator(rc, ds, out);
    const ExperimentReport rep = ratio_experiment(ds, rc.exp, rc.pre, {&g.model, &g.vocab});
    return finish_report(rep, out);
}

int cmd_ppl(const RunConfig& rc, const Flags& f) {
    const Dataset train = load_data(rc, "data", rc.data);
    const Dataset eval = load_data(rc, "eval_data", rc.eval_data);
    if (f.dry_run) {
        std::printf("would fit an order-%zu n-gram model on %zu rows and score %zu rows\n", rc.ngram_order,
                    train.size(), eval.size());
        return kExitOk;
    }
    OutputDir out(rc, "ppl");
    const NgramLm ngram = train_ngram(train, rc.pre, rc.ngram_order);
    std::string tsv = "model\tsubset\tperplexity\n";
    char buf[128];
    std::snprintf(buf, sizeof(buf), "ngram%zu\tall\t%.4f\n", rc.ngram_order, ngram_perplexity(ngram, eval, rc.pre));
    tsv += buf;
    // Boosted rows alone, when the file carries provenance.
    std::vector<LabeledExample> boosted;
    for (const auto& ex : eval.examples()) {
        if (ex.provenance == Provenance::kBoosted) boosted.push_back(ex);
    }
    if (!boosted.empty() && boosted.size() < eval.size()) {
        std::snprintf(buf, sizeof(buf), "ngram%zu\tboosted\t%.4f\n", rc.ngram_order,
                      ngram_perplexity(ngram, eval.with_examples(boosted), rc.pre));
        tsv += buf;
    }
    if (!rc.checkpoint.empty()) {
        require_file("vocab", rc.vocab);
        const Vocab vocab = Vocab::load(rc.vocab);
        const LmModel model = LmModel::load(rc.checkpoint);
        std::snprintf(buf, sizeof(buf), "transformer\tall\t%.4f\n", nn_perplexity(model, eval, vocab, rc.pre));
        tsv += buf;
    }
    ngram.save(out / "ngram.txt");
    write_text(out / "ppl.tsv", tsv);
    std::printf("%s", tsv.c_str());
    out.finish(kExitOk);
    return kExitOk;
}

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config, "key=value configuration file")->check(CLI::ExistingFile);
    sub->add_option("--set", f.sets, "override one configuration key (key=value); repeatable");
    sub->add_option("--seed", f.seed, "run seed (overrides 'seed')");
    sub->add_option("--jobs", f.jobs, "worker threads (overrides 'jobs')")->check(CLI::PositiveNumber);
    sub->add_option("--out", f.out, "output directory (overrides 'out')");
    sub->add_flag("--dry-run", f.dry_run, "print the resolved plan and exit without writing");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"databoost: class-conditional text augmentation and desk-scale evaluation"};
    app.set_version_flag("--version", version_string());
    app.require_subcommand(1);
    Flags flags;
    struct Command {
        const char* name;
        const char* help;
        int (*run)(const RunConfig&, const Flags&);
    };
    const std::vector<Command> commands{
        {"synth", "write the synthetic benchmark corpus", cmd_synth},
        {"ingest", "normalize a dataset and write a stratified train/test split", cmd_ingest},
        {"lexicon", "build the per-class salience lexicon", cmd_lexicon},
        {"train-lm", "train the generator language model", cmd_train_lm},
        {"boost", "augment a dataset with guided generations", cmd_boost},
        {"eval-starve", "run the data-starvation experiment", cmd_eval_starve},
        {"eval-ratio", "run the original/boosted ratio experiment", cmd_eval_ratio},
        {"ppl", "n-gram (and optional transformer) perplexity of a dataset", cmd_ppl},
    };
    std::vector<CLI::App*> subs;
    for (const auto& c : commands) {
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        add_common(sub, flags);
        if (std::string(c.name) == "boost") sub->add_flag("--yes", flags.yes, "skip the confirmation prompt");
        subs.push_back(sub);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }
    for (std::size_t i = 0; i < commands.size(); ++i) {
        if (!subs[i]->parsed()) continue;
        try {
            const RunConfig rc = read_run_config(merged_key_values(flags));
            return commands[i].run(rc, flags);
        } catch (const Error& e) {
            std::fprintf(stderr, "{\"error\":\"%s\",\"message\":%s}\n", error_code_name(e.code()).data(),
                         nlohmann::json(std::string(e.what())).dump().c_str());
            return e.code() == ErrorCode::kConfig ? kExitConfig : kExitRuntime;
        } catch (const std::exception& e) {
            std::fprintf(stderr, "{\"error\":\"Internal\",\"message\":%s}\n",
                         nlohmann::json(std::string(e.what())).dump().c_str());
            return kExitRuntime;
        }
    }
    return kExitConfig;
}
