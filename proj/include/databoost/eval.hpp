// Copyright 2026 The databoost Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <unordered_map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "databoost/augment.hpp"
#include "databoost/config.hpp"
#include "databoost/corpus.hpp"
#include "databoost/guide.hpp"
#include "databoost/lm.hpp"

namespace databoost {

// ---------------------------------------------------------------- synthetic corpus

/// Labeled corpus whose classes are separated by class-specific marker
/// words drawn with Zipf frequencies, embedded in a shared Markov chain of
/// filler words. Raw texts also carry stopwords, punctuation, capitals and
/// the occasional URL or hashtag so preprocessing has work to do.
struct SynthConfig {
    std::size_t num_classes = 2;
    std::size_t examples = 4000;
    std::size_t markers_per_class = 40;
    std::size_t filler_words = 60;
    double marker_rate = 0.3;
    double noise = 0.1;  // chance a marker comes from another class
    double zipf_exponent = 1.1;
    std::size_t min_len = 6;
    std::size_t max_len = 14;
    std::uint64_t seed = 1;

    void read(ConfigReader& r, const std::string& prefix = "synth.");
    void write(KeyValues& kv, const std::string& prefix = "synth.") const;
};

Dataset synth_corpus(const SynthConfig& cfg);
/// Marker words of each class in rank order (most frequent first).
std::vector<std::vector<std::string>> synth_markers(const SynthConfig& cfg);

// ---------------------------------------------------------------- classifiers

enum class Arch { kBagOfEmbeddings, kConvWindow };

std::string_view arch_name(Arch arch);
std::optional<Arch> parse_arch(std::string_view name);

struct ClassifierConfig {
    std::size_t dim = 32;
    std::size_t filters = 32;
    std::size_t width = 3;
    std::size_t epochs = 10;
    double learning_rate = 0.02;
    // Rows of the conv filters and output weights are rescaled to at most
    // this L2 norm after each update; 0 disables the constraint.
    double max_norm = 3.0;
};

/// Trained text classifier over preprocessed tokens. Unknown words are
/// ignored; an input with no known word is classified from the biases.
class Classifier {
  public:
    Arch arch() const { return arch_; }
    const std::vector<std::string>& classes() const { return classes_; }
    std::size_t predict(const std::vector<std::string>& tokens) const;
    std::vector<std::size_t> predict(const Dataset& ds, const PreprocessConfig& cfg) const;
    /// All learned parameters in a fixed order.
    std::vector<double> parameters() const;

  private:
    friend Classifier train_classifier(Arch, const Dataset&, const PreprocessConfig&, std::uint64_t,
                                       const ClassifierConfig&);
    std::vector<std::size_t> encode(const std::vector<std::string>& tokens) const;
    void scores(const std::vector<std::size_t>& ids, std::vector<double>& out) const;

    Arch arch_ = Arch::kBagOfEmbeddings;
    ClassifierConfig cfg_;
    std::vector<std::string> classes_;
    std::unordered_map<std::string, std::size_t> words_;
    Matrix emb_;     // words x dim
    Matrix conv_w_;  // filters x (width * dim)
    Matrix conv_b_;  // 1 x filters
    Matrix out_w_;   // classes x features
    Matrix out_b_;   // 1 x classes
};

/// Throws kDegenerateTrainSet when fewer than two classes have rows.
Classifier train_classifier(Arch arch, const Dataset& train, const PreprocessConfig& cfg, std::uint64_t seed,
                            const ClassifierConfig& ccfg = {});

/// Unweighted mean of per-class F1 over k classes; a class never predicted
/// and never present contributes 0.
double macro_f1(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& predicted, std::size_t k);
double macro_f1(const Classifier& model, const Dataset& test, const PreprocessConfig& cfg);
/// Labels of a dataset as class indices.
std::vector<std::size_t> label_indices(const Dataset& ds);

// ---------------------------------------------------------------- statistics

double mean(const std::vector<double>& xs);
double stddev(const std::vector<double>& xs);  // sample standard deviation

struct PairedTest {
    double mean_diff = 0.0;
    double t = 0.0;
    double p_value = 1.0;  // one-sided, H1: mean(after - before) > 0
};

PairedTest paired_t_test(const std::vector<double>& before, const std::vector<double>& after);

// ---------------------------------------------------------------- experiments

struct ExperimentConfig {
    double test_fraction = 0.2;
    std::uint64_t seed = 1;
    /// Training-set sizes as fractions of the whole dataset (at most
    /// 1 - test_fraction, which is the full train split).
    std::vector<double> fractions{0.05};
    std::size_t repeats = 5;
    std::vector<Arch> archs{Arch::kBagOfEmbeddings, Arch::kConvWindow};
    bool run_unboosted = true;
    bool run_databoost = true;
    bool run_naive = false;
    double naive_probability = 0.1;
    std::size_t lexicon_size = 20;
    std::size_t lexicon_min_count = 2;
    GuideConfig guide;
    std::size_t max_attempts = 10;
    std::size_t jobs = 1;
    ClassifierConfig classifier;
    std::size_t ngram_order = 3;
    /// original/boosted percentage pairs
    std::vector<std::pair<double, double>> ratios{{100, 0}, {75, 25}, {50, 50}, {25, 75}};

    void read(ConfigReader& r, const std::string& prefix = "exp.");
    void write(KeyValues& kv, const std::string& prefix = "exp.") const;
    void validate() const;
};

struct ReportRow {
    std::string experiment;  // "starve" or "ratio"
    std::string arch;
    std::string method;  // "none", "databoost" or "naive"
    double fraction = 0.0;
    std::string ratio;  // "75/25" for ratio rows
    std::size_t repeat = 0;
    std::uint64_t seed = 0;
    std::size_t train_size = 0;
    double f1 = 0.0;
    double ppl_boosted = std::numeric_limits<double>::quiet_NaN();
    double ppl_mixed = std::numeric_limits<double>::quiet_NaN();
    bool partial = false;
};

struct ExperimentReport {
    std::vector<ReportRow> rows;
    KeyValues config;
    std::string version;
    std::string test_hash;  // FNV-1a of the serialized test split
    /// Boosted training sets produced along the way, in row order of
    /// first use (not part of the TSV).
    std::vector<Dataset> boosted_sets;

    std::string to_tsv() const;
    /// Means and standard deviations per condition as an aligned table.
    std::string summary() const;
    /// F1 values of matching rows, ordered by repeat.
    std::vector<double> f1_values(std::string_view arch, std::string_view method, double fraction) const;
    std::vector<double> f1_values_ratio(std::string_view arch, std::string_view ratio) const;
};

/// Model and vocabulary shared by every boosted condition.
struct GeneratorModel {
    const LmModel* model = nullptr;
    const Vocab* vocab = nullptr;
};

std::string version_string();
std::uint64_t fnv1a(std::string_view bytes);

/// Splits ds (already preprocessed) once with cfg.seed; every condition
/// shares that test split.
ExperimentReport starvation_experiment(const Dataset& ds, const ExperimentConfig& cfg, const PreprocessConfig& pcfg,
                                       const GeneratorModel& gen);
ExperimentReport ratio_experiment(const Dataset& ds, const ExperimentConfig& cfg, const PreprocessConfig& pcfg,
                                  const GeneratorModel& gen);

/// The split every experiment uses.
std::pair<Dataset, Dataset> experiment_split(const Dataset& ds, const ExperimentConfig& cfg);

}  // namespace databoost
