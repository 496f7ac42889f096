// Copyright 2026 The databoost Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "databoost/error.hpp"
#include "databoost/eval.hpp"
#include "databoost/ngram.hpp"
#include "oracles.hpp"

using namespace databoost;

namespace {

Dataset separable(std::size_t per_class, std::uint64_t seed) {
    Rng rng(seed);
    const std::vector<std::string> a{"apple", "banana", "cherry", "grape"}, b{"engine", "piston", "gear", "valve"};
    const std::vector<std::string> shared{"thing", "stuff", "item", "object", "piece"};
    std::vector<LabeledExample> rows;
    for (std::size_t i = 0; i < 2 * per_class; ++i) {
        const bool is_a = i % 2 == 0;
        std::string text;
        for (int t = 0; t < 5; ++t) {
            const auto& pool = rng.uniform() < 0.4 ? (is_a ? a : b) : shared;
            text += (t ? " " : "") + pool[rng.below(pool.size())];
        }
        text += is_a ? " apple" : " engine";
        rows.push_back({text, is_a ? "fruit" : "machine", {}, {}});
    }
    return Dataset(std::move(rows), {"fruit", "machine"});
}

double train_accuracy(const Classifier& clf, const Dataset& ds, const PreprocessConfig& cfg) {
    const auto pred = clf.predict(ds, cfg);
    const auto truth = label_indices(ds);
    std::size_t ok = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) ok += pred[i] == truth[i];
    return static_cast<double>(ok) / static_cast<double>(pred.size());
}

struct SmallSetup {
    Dataset ds;
    PreprocessConfig pcfg = PreprocessConfig::standard();
    Vocab vocab;
    LmModel model;
    ExperimentConfig cfg;

    SmallSetup() {
        SynthConfig sc;
        sc.examples = 300;
        ds = synth_corpus(sc);
        cfg.repeats = 2;
        cfg.fractions = {0.2};
        cfg.guide.k = 1;
        cfg.guide.max_len = 8;
        cfg.guide.num_rollouts = 4;
        cfg.guide.eta = 1.0;
        cfg.lexicon_size = 5;
        cfg.max_attempts = 4;
        cfg.classifier.epochs = 3;
        cfg.classifier.dim = 8;
        cfg.classifier.filters = 8;
        const auto split = experiment_split(ds, cfg);
        vocab = build_vocab(split.first, pcfg, 1);
        LmConfig lc;
        lc.vocab_size = vocab.size();
        lc.d_model = 8;
        lc.n_layers = 1;
        lc.n_heads = 2;
        lc.d_ff = 16;
        model = LmModel::init(lc, 5);
    }
    GeneratorModel gen() const { return {&model, &vocab}; }
};

}  // namespace

TEST_CASE("synthetic corpus shape and determinism") {
    SynthConfig sc;
    sc.examples = 400;
    const Dataset a = synth_corpus(sc), b = synth_corpus(sc);
    CHECK(a == b);
    CHECK(a.size() == 400);
    CHECK(a.class_counts() == std::vector<std::size_t>{200, 200});
    const auto markers = synth_markers(sc);
    REQUIRE(markers.size() == 2);
    CHECK(markers[0].size() == sc.markers_per_class);
    std::set<std::string> m0(markers[0].begin(), markers[0].end());
    for (const auto& w : markers[1]) CHECK(m0.count(w) == 0);
    // Every row keeps at least one marker after preprocessing.
    const PreprocessConfig pcfg = PreprocessConfig::standard();
    std::set<std::string> all(m0);
    all.insert(markers[1].begin(), markers[1].end());
    for (const auto& ex : a.examples()) {
        const auto toks = preprocess(ex.text, pcfg);
        REQUIRE(toks.has_value());
        CHECK(std::any_of(toks->begin(), toks->end(), [&](const std::string& t) { return all.count(t) > 0; }));
        for (const auto& t : *toks) CHECK(t.find("http") == std::string::npos);
    }
    SynthConfig four = sc;
    four.num_classes = 4;
    CHECK(synth_corpus(four).num_classes() == 4);
    SynthConfig other = sc;
    other.seed = 2;
    CHECK_FALSE(synth_corpus(other) == a);
}

TEST_CASE("classifiers fit a separable corpus") {
    const Dataset ds = separable(100, 3);
    const PreprocessConfig pcfg = PreprocessConfig::standard();
    for (Arch arch : {Arch::kBagOfEmbeddings, Arch::kConvWindow}) {
        const Classifier clf = train_classifier(arch, ds, pcfg, 1);
        CHECK(train_accuracy(clf, ds, pcfg) > 0.95);
        CHECK(clf.arch() == arch);
    }
}

TEST_CASE("classifier errors and determinism") {
    const PreprocessConfig pcfg = PreprocessConfig::standard();
    const Dataset ds = separable(30, 4);
    std::vector<LabeledExample> one_class;
    for (const auto& ex : ds.examples()) {
        if (ex.label == "fruit") one_class.push_back(ex);
    }
    try {
        train_classifier(Arch::kBagOfEmbeddings, ds.with_examples(one_class), pcfg, 1);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::kDegenerateTrainSet);
    }
    for (Arch arch : {Arch::kBagOfEmbeddings, Arch::kConvWindow}) {
        const auto p1 = train_classifier(arch, ds, pcfg, 7).parameters();
        const auto p2 = train_classifier(arch, ds, pcfg, 7).parameters();
        const auto p3 = train_classifier(arch, ds, pcfg, 8).parameters();
        CHECK(p1 == p2);
        CHECK_FALSE(p1 == p3);
    }
    CHECK(parse_arch("boe") == Arch::kBagOfEmbeddings);
    CHECK(parse_arch("conv") == Arch::kConvWindow);
    CHECK_FALSE(parse_arch("lstm").has_value());
}

TEST_CASE("macro F1 closed forms and brute-force agreement") {
    const std::vector<std::size_t> truth{0, 0, 1, 1};
    CHECK(macro_f1(truth, truth, 2) == 1.0);
    CHECK(macro_f1(truth, {0, 0, 0, 0}, 2) == doctest::Approx(1.0 / 3.0));
    CHECK_THROWS_AS(macro_f1({}, {}, 2), Error);
    CHECK_THROWS_AS(macro_f1({0}, {0, 1}, 2), Error);

    Rng rng(12);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t k = 2 + rng.below(4);
        const std::size_t n = 1 + rng.below(1000);
        std::vector<std::size_t> t(n), p(n);
        for (std::size_t i = 0; i < n; ++i) {
            t[i] = rng.below(k);
            p[i] = rng.uniform() < 0.6 ? t[i] : rng.below(k);
        }
        const double f1 = macro_f1(t, p, k);
        CHECK(f1 == doctest::Approx(oracle::macro_f1(t, p, k)).epsilon(1e-12));
        CHECK(f1 >= 0.0);
        CHECK(f1 <= 1.0);
        // Row permutation leaves the score unchanged.
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        rng.shuffle(order);
        std::vector<std::size_t> t2(n), p2(n);
        for (std::size_t i = 0; i < n; ++i) {
            t2[i] = t[order[i]];
            p2[i] = p[order[i]];
        }
        CHECK(macro_f1(t2, p2, k) == doctest::Approx(f1).epsilon(1e-12));
    }
}

TEST_CASE("model-level macro F1 is invariant to test-row order") {
    const PreprocessConfig pcfg = PreprocessConfig::standard();
    const Dataset train = separable(40, 1), test = separable(20, 2);
    const Classifier clf = train_classifier(Arch::kConvWindow, train, pcfg, 3);
    auto rows = test.examples();
    Rng rng(5);
    rng.shuffle(rows);
    CHECK(macro_f1(clf, test.with_examples(rows), pcfg) == doctest::Approx(macro_f1(clf, test, pcfg)).epsilon(1e-12));
}

TEST_CASE("summary statistics and the paired test") {
    CHECK(mean({1, 2, 3, 4}) == 2.5);
    CHECK(stddev({2, 4, 4, 4, 5, 5, 7, 9}) == doctest::Approx(std::sqrt(32.0 / 7.0)));
    CHECK(stddev({3}) == 0.0);
    // Differences 1..5: t = 3 / (sd / sqrt 5) with sd = sqrt(2.5); df = 4.
    const PairedTest pt = paired_t_test({0, 0, 0, 0, 0}, {1, 2, 3, 4, 5});
    CHECK(pt.mean_diff == 3.0);
    CHECK(pt.t == doctest::Approx(3.0 / std::sqrt(0.5)).epsilon(1e-12));
    CHECK(pt.p_value == doctest::Approx(0.006605).epsilon(1e-3));
    const PairedTest neg = paired_t_test({1, 2, 3, 4, 5}, {0, 0, 0, 0, 0});
    CHECK(neg.p_value > 0.99);
    CHECK(paired_t_test({1, 1}, {2, 2}).p_value == 0.0);
    CHECK_THROWS_AS(paired_t_test({1}, {2}), Error);
}

TEST_CASE("starvation experiment bookkeeping") {
    SmallSetup s;
    s.cfg.fractions = {0.1, 0.2};
    s.cfg.run_naive = true;
    const ExperimentReport rep = starvation_experiment(s.ds, s.cfg, s.pcfg, s.gen());
    // fractions x repeats x methods x archs
    CHECK(rep.rows.size() == 2 * 2 * 3 * 2);
    const auto [train, test] = experiment_split(s.ds, s.cfg);
    CHECK(rep.test_hash == [&] {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(to_jsonl(test))));
        return std::string(buf);
    }());
    for (const auto& row : rep.rows) {
        CHECK(row.f1 >= 0.0);
        CHECK(row.f1 <= 1.0);
        if (row.method != "none") CHECK(row.train_size == train.size());
    }
    CHECK(rep.f1_values("conv", "databoost", 0.1).size() == 2);

    const std::string tsv = rep.to_tsv();
    CHECK(tsv.find("# version=databoost ") == 0);
    CHECK(tsv.find("# exp.guide.") == std::string::npos);
    CHECK(tsv.find("# guide.eta=1") != std::string::npos);
    std::istringstream in(tsv);
    std::string line;
    std::size_t data_lines = 0;
    while (std::getline(in, line)) data_lines += !line.empty() && line[0] != '#';
    CHECK(data_lines == rep.rows.size() + 1);
    CHECK(rep.summary().find("databoost") != std::string::npos);

    // Reports are deterministic.
    CHECK(starvation_experiment(s.ds, s.cfg, s.pcfg, s.gen()).to_tsv() == tsv);
}

TEST_CASE("full-train fraction makes boosting a no-op") {
    SmallSetup s;
    s.cfg.fractions = {0.8};
    const ExperimentReport rep = starvation_experiment(s.ds, s.cfg, s.pcfg, s.gen());
    for (const char* arch : {"boe", "conv"}) {
        CHECK(rep.f1_values(arch, "none", 0.8) == rep.f1_values(arch, "databoost", 0.8));
    }
}

TEST_CASE("ratio experiment identities") {
    SmallSetup s;
    s.cfg.fractions = {0.8};
    s.cfg.run_databoost = false;
    const ExperimentReport starve_rep = starvation_experiment(s.ds, s.cfg, s.pcfg, s.gen());
    s.cfg.run_databoost = true;
    const ExperimentReport ratio_rep = ratio_experiment(s.ds, s.cfg, s.pcfg, s.gen());
    CHECK(ratio_rep.rows.size() == 4 * 2 * 2);
    CHECK(ratio_rep.test_hash == starve_rep.test_hash);
    for (const char* arch : {"boe", "conv"}) {
        CHECK(ratio_rep.f1_values_ratio(arch, "100/0").size() == 2);
        CHECK(ratio_rep.f1_values_ratio(arch, "100/0") == starve_rep.f1_values(arch, "none", 0.8));
    }
    const auto [train, test] = experiment_split(s.ds, s.cfg);
    const NgramLm ngram = train_ngram(train, s.pcfg, s.cfg.ngram_order);
    const double test_ppl = ngram_perplexity(ngram, test, s.pcfg);
    for (const auto& row : ratio_rep.rows) {
        CHECK(row.train_size == train.size());
        CHECK(std::isfinite(row.ppl_boosted));
        if (row.ratio == "100/0") CHECK(row.ppl_boosted == doctest::Approx(test_ppl).epsilon(1e-12));
    }
}

TEST_CASE("experiment config validation and round trip") {
    ExperimentConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    ExperimentConfig bad;
    bad.fractions = {0.9};
    bad.repeats = 0;
    bad.ratios = {{60, 30}};
    try {
        bad.validate();
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::kConfig);
        const std::string msg = e.what();
        CHECK(msg.find("fraction") != std::string::npos);
        CHECK(msg.find("repeats") != std::string::npos);
        CHECK(msg.find("ratio") != std::string::npos);
    }
    ExperimentConfig custom;
    custom.fractions = {0.05, 0.1};
    custom.archs = {Arch::kConvWindow};
    custom.ratios = {{100, 0}, {25, 75}};
    custom.guide.k = 4;
    custom.classifier.learning_rate = 0.02;
    KeyValues kv;
    custom.write(kv);
    ConfigReader reader(kv);
    ExperimentConfig back;
    back.read(reader);
    reader.finish();
    KeyValues kv2;
    back.write(kv2);
    CHECK(kv == kv2);

    ConfigReader bad_arch(KeyValues{{"exp.archs", "boe,lstm"}});
    ExperimentConfig ignored;
    ignored.read(bad_arch);
    CHECK_THROWS_AS(bad_arch.finish(), Error);
}
