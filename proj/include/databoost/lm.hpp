// Copyright 2026 The databoost Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "databoost/corpus.hpp"
#include "databoost/matrix.hpp"
#include "databoost/tape.hpp"

namespace databoost {

struct LmConfig {
    std::size_t vocab_size = 0;
    std::size_t d_model = 64;
    std::size_t n_layers = 2;
    std::size_t n_heads = 2;
    std::size_t context = 32;
    std::size_t d_ff = 256;

    bool operator==(const LmConfig&) const = default;
};

struct LayerParams {
    Matrix ln1_g, ln1_b;
    Matrix wq, wk, wv, wo;  // d x d, stored out x in
    Matrix ln2_g, ln2_b;
    Matrix w1, b1;  // d_ff x d, 1 x d_ff
    Matrix w2, b2;  // d x d_ff, 1 x d
};

/// Pre-LN causal transformer decoder with tied input/output embeddings.
struct LmModel {
    LmConfig config;
    Matrix tok_emb;  // vocab x d
    Matrix pos_emb;  // context x d
    std::vector<LayerParams> layers;
    Matrix lnf_g, lnf_b;

    /// Random initialization (deterministic in seed).
    static LmModel init(const LmConfig& cfg, std::uint64_t seed);
    /// Same shapes, all zeros (gradient/optimizer buffers).
    static LmModel zeros(const LmConfig& cfg);

    /// Throws kInvalidArgument on inconsistent shapes, kNonFinite on NaN/inf.
    void validate() const;
    std::vector<Matrix*> parameters();
    std::vector<const Matrix*> parameters() const;
    std::size_t num_parameters() const;

    void save(const std::filesystem::path& path) const;
    static LmModel load(const std::filesystem::path& path);
    std::vector<std::uint8_t> serialize() const;
    static LmModel deserialize(std::span<const std::uint8_t> bytes);
};

/// Per-layer attention keys and values for the tokens fed so far. Row i of
/// keys[l] / values[l] belongs to position i.
struct KvCache {
    std::vector<Matrix> keys;
    std::vector<Matrix> values;
    /// Token fed at the last position (its residual stream is recomputed
    /// when logits are taken from a perturbed cache).
    TokenId last_token = Vocab::kBos;

    static KvCache empty(const LmConfig& cfg);
    std::size_t length() const { return keys.empty() ? 0 : keys[0].rows; }
    std::size_t num_entries() const;
    bool same_shape(const KvCache& o) const;

    /// this += alpha * other, entrywise over keys and values.
    void axpy(double alpha, const KvCache& other);
    double squared_norm() const;
    bool all_finite() const;
};

/// Feeds one token at position cache.length(): appends its keys/values and
/// returns next-token logits. Throws kContextOverflow at the context limit.
std::vector<double> step(const LmModel& model, TokenId token, KvCache& cache);

/// Next-token logits at the last cached position, with the residual stream of
/// that position recomputed against the given cache contents. Equals the
/// logits returned by the step() that produced an unmodified cache.
std::vector<double> logits_from_cache(const LmModel& model, const KvCache& cache);

/// Full-prefix forward of a token sequence (positions 0..n-1); returns n x V
/// logits, one row per position.
Matrix forward_sequence(const LmModel& model, std::span<const TokenId> tokens);

/// Builds a cache by stepping through `tokens` from an empty cache; returns
/// the logits after the last token.
std::vector<double> prefill(const LmModel& model, std::span<const TokenId> tokens, KvCache& cache);

/// Softmax of logits / temperature, computed in double.
std::vector<double> softmax_with_temperature(std::span<const double> logits, double temperature);

// ---------------------------------------------------------------- reward gradients

/// Handles to the cache leaves and the resulting logits inside a tape.
struct CacheGraph {
    std::vector<ad::Var> keys;
    std::vector<ad::Var> values;
    ad::Var logits;  // 1 x V
};

/// Builds cache leaves and the last-position logits on `tape`.
CacheGraph build_cache_graph(ad::Tape& tape, const LmModel& model, const KvCache& cache);

using RewardBuilder = std::function<ad::Var(ad::Tape&, const CacheGraph&)>;

struct RewardGradient {
    double value = 0.0;
    KvCache gradient;  // same shape as the input cache
};

/// Exact reverse-mode gradient of a scalar reward w.r.t. every key/value
/// entry in the cache. Throws kNonFinite if the value or gradient is not finite.
RewardGradient reward_gradient(const LmModel& model, const KvCache& cache, const RewardBuilder& reward);

/// Reward value only (no backward pass).
double reward_value(const LmModel& model, const KvCache& cache, const RewardBuilder& reward);

// ---------------------------------------------------------------- training

struct TrainConfig {
    std::size_t epochs = 10;
    std::size_t batch_size = 16;
    double learning_rate = 3e-3;
    double grad_clip = 1.0;
    double holdout_fraction = 0.05;
    std::uint64_t seed = 1;
    LmConfig model;  // vocab_size is filled from the vocabulary
};

struct TrainStats {
    double initial_loss = 0.0;  // held-out cross-entropy before training
    double final_loss = 0.0;    // held-out cross-entropy after training
    double last_train_loss = 0.0;
    std::size_t steps = 0;
    std::size_t sequences = 0;
};

/// Encodes each preprocessed example as BOS w1 .. wn EOS.
std::vector<std::vector<TokenId>> encode_dataset(const Dataset& ds, const Vocab& vocab, const PreprocessConfig& cfg);

/// Adam on next-token cross-entropy. Deterministic given cfg.seed. Throws
/// kDivergence (with epoch/step) if the loss becomes non-finite.
LmModel train_lm(const Dataset& train, const Vocab& vocab, const PreprocessConfig& pcfg, const TrainConfig& cfg,
                 TrainStats* stats = nullptr);
LmModel train_lm_sequences(const std::vector<std::vector<TokenId>>& sequences, const TrainConfig& cfg,
                           TrainStats* stats = nullptr);

/// Mean per-token cross-entropy (natural log) over BOS-prefixed sequences,
/// predicting every token after BOS including EOS.
double mean_cross_entropy(const LmModel& model, const std::vector<std::vector<TokenId>>& sequences);
double nn_perplexity(const LmModel& model, const std::vector<std::vector<TokenId>>& sequences);
double nn_perplexity(const LmModel& model, const Dataset& ds, const Vocab& vocab, const PreprocessConfig& cfg);

}  // namespace databoost
