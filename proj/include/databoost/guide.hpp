// Copyright 2026 The databoost Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Class-conditional decoding by perturbing the attention cache. At each
// step the cache (theta) is copied to theta_c and moved k times along the
// normalized gradient of the reward
//
//   R = mean_j [ G(a_j) * pi_c(a_j) / pi(a_j) ] - beta * KL(pi || pi_c),
//
// where pi and pi_c are the temperature-scaled next-token distributions from
// theta and theta_c, a_j are rollout actions drawn from pi, and G(a) is the
// salience gain of the one-hot distribution on a against the class lexicon. beta follows a
// doubling/halving controller around the target KL sigma. The next token is
// sampled from pi_c and the perturbed cache is kept for the following step.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "databoost/config.hpp"
#include "databoost/corpus.hpp"
#include "databoost/lm.hpp"
#include "databoost/random.hpp"
#include "databoost/salience.hpp"
#include "databoost/tape.hpp"

namespace databoost {

struct GuideConfig {
    double beta0 = 0.1;
    double sigma = 0.5;
    std::size_t k = 3;
    double eta = 0.02;
    double temperature = 1.0;
    std::size_t max_len = 30;
    std::size_t num_rollouts = 8;
    double epsilon = 0.01;

    /// Throws kConfig listing every violated constraint.
    void validate() const;
    /// Reads "<prefix>beta0", "<prefix>sigma", ... keeping unset fields.
    void read(ConfigReader& reader, const std::string& prefix = "guide.");
    void write(KeyValues& kv, const std::string& prefix = "guide.") const;

    bool operator==(const GuideConfig&) const = default;
};

/// Lexicon words of one class resolved to token ids and embedding rows.
struct LexiconTarget {
    std::vector<TokenId> ids;
    Matrix embeddings;  // one row per lexicon word
};

/// Throws kMissingLexiconWord if a word is not in the vocabulary and
/// kInvalidArgument if the entry list is empty.
LexiconTarget resolve_lexicon(std::span<const LexiconEntry> entries, const Vocab& vocab, const Matrix& embeddings);
LexiconTarget resolve_lexicon(const Lexicon& lexicon, std::string_view cls, const Vocab& vocab,
                              const Matrix& embeddings);

/// sum_i log(eps + (1 + cos(e_hat, lex_i)) / 2) with e_hat = dist * emb.
double salience_gain(std::span<const double> dist, const Matrix& lexicon_embeddings, const Matrix& embeddings,
                     double epsilon);
/// Differentiable form; dist is 1 x V, emb V x d, lex n x d.
ad::Var salience_gain(ad::Tape& tape, ad::Var dist, ad::Var emb, ad::Var lex, double epsilon);

/// Gain of the one-hot distribution on `token`.
double token_gain(TokenId token, const LexiconTarget& target, const Matrix& embeddings, double epsilon);
/// Mean gain of the one-hot distributions of the given tokens, i.e. of the
/// emitted text itself. Zero for an empty token list.
double output_gain(std::span<const TokenId> tokens, const LexiconTarget& target, const Matrix& embeddings,
                   double epsilon);

constexpr double kProbabilityFloor = 1e-12;

/// sum_v p log(p / max(q, floor)).
double kl_divergence(std::span<const double> p, std::span<const double> q);

struct PolicyPair {
    std::vector<double> unconditional;  // pi(. | s_i)
    std::vector<double> conditional;    // pi_c(. | s_i)
};

/// Sum of per-step KL(pi || pi_c) over a trajectory.
double kl_policies(std::span<const PolicyPair> trajectory);

/// Rollout actions with weights that sum to one (1/n each when sampled).
struct Rollouts {
    std::vector<TokenId> actions;
    std::vector<double> weights;
};

Rollouts sample_rollouts(std::span<const double> unconditional, std::size_t n, Rng& rng);
/// Every token with its unconditional probability as weight.
Rollouts enumerate_rollouts(std::span<const double> unconditional);

/// Everything the reward needs besides the conditional cache.
struct RewardContext {
    const LmModel* model = nullptr;
    const LexiconTarget* target = nullptr;
    std::vector<double> unconditional;  // pi(. | s_t) at temperature T
    Rollouts rollouts;
    double beta = 0.1;
    double temperature = 1.0;
    double epsilon = 0.01;
};

struct RewardParts {
    double reward = 0.0;
    double gain = 0.0;   // weighted mean rollout gain, without importance ratios
    double ratio = 0.0;  // weighted mean importance ratio
    double kl = 0.0;
    std::vector<double> conditional;  // pi_c at temperature T
    std::vector<double> logits;       // conditional logits
};

/// Builds R on a tape from the logits of a cache graph.
ad::Var reward_graph(ad::Tape& tape, const CacheGraph& graph, const RewardContext& ctx);
/// Evaluates R and its pieces for the conditional cache theta_c.
RewardParts step_reward(const KvCache& theta_c, const RewardContext& ctx);
/// Same composition evaluated on explicit logits (no cache involved).
RewardParts reward_from_logits(std::span<const double> conditional_logits, const RewardContext& ctx);

/// theta_c + eta * g / ||g||; returns nullopt (skip) when ||g|| < 1e-12.
std::optional<KvCache> normalized_step(const KvCache& theta_c, const KvCache& gradient, double eta);

struct PolicyUpdate {
    KvCache theta_c;
    std::vector<double> gradient_norms;  // one per sub-step, before normalization
    std::size_t skipped = 0;
    bool fail_open = false;
    std::string failure;
};

/// k normalized gradient ascent sub-steps from theta. On a non-finite
/// gradient or state the update is abandoned and theta_c = theta.
PolicyUpdate policy_update(const KvCache& theta, const RewardContext& ctx, std::size_t k, double eta);

/// Doubles beta when kl >= 2 sigma, halves it when kl <= sigma / 2.
double adapt_beta(double beta, double kl, double sigma);

struct StepRecord {
    std::size_t step = 0;
    double reward = 0.0;
    double kl = 0.0;
    double beta = 0.0;  // beta used for this step's update
    double gain = 0.0;
    TokenId token = 0;
    std::size_t skipped = 0;
    bool fail_open = false;
};

struct Generation {
    std::vector<TokenId> tokens;  // excludes BOS, prompt and EOS
    std::string text;
    bool empty = false;       // end-of-sequence came first
    bool truncated = false;   // stopped at max_len
    std::vector<StepRecord> steps;
};

/// Per-step diagnostics as JSON lines tagged with `id`.
std::string diagnostics_jsonl(const Generation& g, std::string_view id);

/// Decoding state for one sequence; single-threaded, owns its caches.
class DecodeSession {
  public:
    DecodeSession(const LmModel& model, const Vocab& vocab, GuideConfig cfg, std::uint64_t seed,
                  std::span<const TokenId> prompt = {});

    bool done() const { return done_; }
    /// One guided step; target == nullptr or k == 0 decodes unconditionally.
    void advance(const LexiconTarget* target);
    Generation finish() const;

    const KvCache& theta() const { return theta_; }
    const KvCache& theta_c() const { return theta_c_; }
    double beta() const { return beta_; }
    const std::vector<TokenId>& tokens() const { return tokens_; }
    const std::vector<StepRecord>& log() const { return log_; }
    /// Unconditional next-token logits at the current state.
    const std::vector<double>& logits() const { return logits_; }

  private:
    TokenId sample(std::span<const double> logits);
    void append(TokenId token);

    const LmModel& model_;
    const Vocab& vocab_;
    GuideConfig cfg_;
    KvCache theta_;
    KvCache theta_c_;
    std::vector<double> logits_;
    std::vector<TokenId> tokens_;
    std::vector<StepRecord> log_;
    double beta_;
    Rng token_rng_;
    Rng rollout_rng_;
    bool done_ = false;
    bool empty_ = false;
    bool truncated_ = false;
};

Generation generate_conditional(const LmModel& model, const Vocab& vocab, const LexiconTarget& target,
                                const GuideConfig& cfg, std::uint64_t seed, std::span<const TokenId> prompt = {});
Generation generate_conditional(const LmModel& model, const Vocab& vocab, const Lexicon& lexicon,
                                std::string_view cls, const GuideConfig& cfg, std::uint64_t seed);
/// Plain temperature sampling with the same token stream as the guided
/// decoder, so k = 0 reproduces it exactly.
Generation generate_unconditional(const LmModel& model, const Vocab& vocab, const GuideConfig& cfg,
                                  std::uint64_t seed, std::span<const TokenId> prompt = {});

}  // namespace databoost
