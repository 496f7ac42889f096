// Copyright 2026 The databoost Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "databoost/corpus.hpp"

namespace databoost {

/// Interpolated Kneser-Ney n-gram model stored in backoff form: for every
/// seen n-gram the interpolated probability, for every seen context its
/// backoff weight. The lowest order interpolates with a uniform distribution
/// over the predicted vocabulary (training words, </s>, <unk>).
class NgramLm {
  public:
    static constexpr std::string_view kBos = "<s>";
    static constexpr std::string_view kEos = "</s>";
    static constexpr std::string_view kUnk = "<unk>";

    std::size_t order() const { return order_; }
    /// Predicted vocabulary in id order.
    const std::vector<std::string>& vocabulary() const { return words_; }
    std::size_t vocab_size() const { return words_.size(); }

    /// p(word | history); history is the full preceding token list starting
    /// with "<s>" (only the last order-1 tokens matter). Unknown tokens are
    /// treated as <unk>.
    double prob(std::span<const std::string> history, std::string_view word) const;

    /// Sorted, diffable text table: context, token, natural-log probability,
    /// plus <backoff> rows for context weights.
    std::string to_text() const;
    static NgramLm from_text(std::string_view text);
    void save(const std::filesystem::path& path) const;
    static NgramLm load(const std::filesystem::path& path);

    // Id-level access used by training, scoring and tests.
    std::int32_t word_id(std::string_view w) const;
    std::int32_t bos_id() const { return bos_id_; }
    double prob_ids(std::span<const std::int32_t> context, std::int32_t word) const;

  private:
    friend NgramLm train_ngram(const std::vector<std::vector<std::string>>& sentences, std::size_t order,
                               bool include_eos);

    using Key = std::vector<std::int32_t>;
    std::size_t order_ = 0;
    std::vector<std::string> words_;  // predicted vocabulary; <s> is kept separately
    std::unordered_map<std::string, std::int32_t> ids_;
    std::int32_t bos_id_ = -1;
    // probs_[k-1]: k-gram (context..., word) -> probability
    std::vector<std::map<Key, double>> probs_;
    // backoff_[k-1]: context of length k-1 -> gamma, for order-k distributions
    std::vector<std::map<Key, double>> backoff_;

    const std::string& token_name(std::int32_t id) const;
};

/// Sentences are token lists without <s>/</s>. Orders 1..5 are supported.
/// With include_eos unset, sentence ends are not counted as events (</s>
/// then only receives smoothing mass).
NgramLm train_ngram(const std::vector<std::vector<std::string>>& sentences, std::size_t order,
                    bool include_eos = true);
NgramLm train_ngram(const Dataset& train, const PreprocessConfig& cfg, std::size_t order);

/// exp(mean negative log-likelihood per predicted token); </s> is predicted
/// at the end of each sentence when include_eos is set.
double ngram_perplexity(const NgramLm& lm, const std::vector<std::vector<std::string>>& sentences,
                        bool include_eos = true);
double ngram_perplexity(const NgramLm& lm, const Dataset& ds, const PreprocessConfig& cfg);

/// Preprocessed token lists for every non-dropped example.
std::vector<std::vector<std::string>> tokenize_dataset(const Dataset& ds, const PreprocessConfig& cfg);

}  // namespace databoost
