// Copyright 2026 The databoost Authors
// SPDX-License-Identifier: Apache-2.0

#include "databoost/guide.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "databoost/error.hpp"
#include "databoost/kernels.hpp"

namespace databoost {

using ad::Tape;
using ad::Var;

void GuideConfig::validate() const {
    std::vector<std::string> bad;
    if (!(beta0 > 0.0)) bad.push_back("beta0 must be > 0");
    if (!(sigma > 0.0)) bad.push_back("sigma must be > 0");
    if (!(eta > 0.0)) bad.push_back("eta must be > 0");
    if (!(temperature > 0.0)) bad.push_back("temperature must be > 0");
    if (num_rollouts < 1) bad.push_back("num_rollouts must be >= 1");
    if (!(epsilon > 0.0 && epsilon <= 0.1)) bad.push_back("epsilon must be in (0, 0.1]");
    if (max_len < 1) bad.push_back("max_len must be >= 1");
    if (bad.empty()) return;
    std::string msg;
    for (const auto& b : bad) msg += (msg.empty() ? "" : "; ") + b;
    throw Error(ErrorCode::kConfig, msg);
}

void GuideConfig::read(ConfigReader& r, const std::string& prefix) {
    beta0 = r.real(prefix + "beta0", beta0);
    sigma = r.real(prefix + "sigma", sigma);
    k = r.count(prefix + "k", k);
    eta = r.real(prefix + "eta", eta);
    temperature = r.real(prefix + "temperature", temperature);
    max_len = r.count(prefix + "max_len", max_len);
    num_rollouts = r.count(prefix + "num_rollouts", num_rollouts);
    epsilon = r.real(prefix + "epsilon", epsilon);
}

void GuideConfig::write(KeyValues& kv, const std::string& prefix) const {
    kv[prefix + "beta0"] = format_real(beta0);
    kv[prefix + "sigma"] = format_real(sigma);
    kv[prefix + "k"] = std::to_string(k);
    kv[prefix + "eta"] = format_real(eta);
    kv[prefix + "temperature"] = format_real(temperature);
    kv[prefix + "max_len"] = std::to_string(max_len);
    kv[prefix + "num_rollouts"] = std::to_string(num_rollouts);
    kv[prefix + "epsilon"] = format_real(epsilon);
}

LexiconTarget resolve_lexicon(std::span<const LexiconEntry> entries, const Vocab& vocab, const Matrix& embeddings) {
    if (entries.empty()) throw Error(ErrorCode::kInvalidArgument, "lexicon entry list is empty");
    LexiconTarget t;
    t.embeddings = Matrix(0, embeddings.cols);
    for (const auto& e : entries) {
        if (!vocab.contains(e.word)) {
            throw Error(ErrorCode::kMissingLexiconWord, "lexicon word '" + e.word + "' is not in the vocabulary");
        }
        const TokenId id = vocab.id(e.word);
        if (static_cast<std::size_t>(id) >= embeddings.rows) {
            throw Error(ErrorCode::kMissingLexiconWord, "lexicon word '" + e.word + "' has no embedding row");
        }
        t.ids.push_back(id);
        t.embeddings.append_row(embeddings.row(static_cast<std::size_t>(id)));
    }
    return t;
}

LexiconTarget resolve_lexicon(const Lexicon& lexicon, std::string_view cls, const Vocab& vocab,
                              const Matrix& embeddings) {
    return resolve_lexicon(lexicon.entries(cls), vocab, embeddings);
}

double salience_gain(std::span<const double> dist, const Matrix& lex, const Matrix& emb, double epsilon) {
    if (dist.size() != emb.rows) throw Error(ErrorCode::kInvalidArgument, "distribution/embedding size mismatch");
    if (lex.rows == 0) throw Error(ErrorCode::kInvalidArgument, "empty lexicon");
    Tape t(false);
    Matrix p(1, dist.size());
    std::copy(dist.begin(), dist.end(), p.data.begin());
    return t.value(salience_gain(t, t.constant(std::move(p)), t.constant_ref(emb), t.constant_ref(lex), epsilon))
        .data[0];
}

Var salience_gain(Tape& t, Var dist, Var emb, Var lex, double epsilon) {
    Var e_hat = t.matmul_nn(dist, emb);
    Var cos = t.cosine_rows(e_hat, lex);
    return t.sum(t.log(t.affine(cos, 0.5, 0.5 + epsilon)));
}

double token_gain(TokenId token, const LexiconTarget& target, const Matrix& emb, double epsilon) {
    if (token < 0 || static_cast<std::size_t>(token) >= emb.rows) {
        throw Error(ErrorCode::kInvalidArgument, "token id out of range");
    }
    if (target.embeddings.rows == 0) throw Error(ErrorCode::kInvalidArgument, "empty lexicon");
    const auto& kt = kernels::active_table();
    const std::size_t d = emb.cols;
    const double* x = emb.row(static_cast<std::size_t>(token)).data();
    const double xn = std::sqrt(kt.dot(x, x, d));
    double g = 0.0;
    for (std::size_t i = 0; i < target.embeddings.rows; ++i) {
        const double* m = target.embeddings.row(i).data();
        const double denom = xn * std::sqrt(kt.dot(m, m, d));
        const double cos = denom > 0.0 ? kt.dot(x, m, d) / denom : 0.0;
        g += std::log(0.5 * cos + 0.5 + epsilon);
    }
    return g;
}

double output_gain(std::span<const TokenId> tokens, const LexiconTarget& target, const Matrix& emb, double epsilon) {
    if (tokens.empty()) return 0.0;
    double total = 0.0;
    for (TokenId tok : tokens) total += token_gain(tok, target, emb, epsilon);
    return total / static_cast<double>(tokens.size());
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw Error(ErrorCode::kInvalidArgument, "kl: support mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) s += p[i] * std::log(p[i] / std::max(q[i], kProbabilityFloor));
    }
    return std::max(s, 0.0);
}

double kl_policies(std::span<const PolicyPair> trajectory) {
    double s = 0.0;
    for (const auto& step : trajectory) s += kl_divergence(step.unconditional, step.conditional);
    return s;
}

Rollouts sample_rollouts(std::span<const double> p, std::size_t n, Rng& rng) {
    if (n == 0) throw Error(ErrorCode::kInvalidArgument, "num_rollouts must be >= 1");
    Rollouts r;
    for (std::size_t j = 0; j < n; ++j) {
        r.actions.push_back(static_cast<TokenId>(rng.categorical(p)));
        r.weights.push_back(1.0 / static_cast<double>(n));
    }
    return r;
}

Rollouts enumerate_rollouts(std::span<const double> p) {
    Rollouts r;
    for (std::size_t v = 0; v < p.size(); ++v) {
        if (p[v] <= 0.0) continue;
        r.actions.push_back(static_cast<TokenId>(v));
        r.weights.push_back(p[v]);
    }
    return r;
}

namespace {

struct RewardVars {
    Var reward, gain, ratio, kl, conditional;
};

RewardVars build_reward(Tape& t, Var logits, const RewardContext& ctx) {
    if (!ctx.model || !ctx.target) throw Error(ErrorCode::kInvalidArgument, "reward context is incomplete");
    const std::size_t vocab = ctx.model->config.vocab_size;
    if (ctx.unconditional.size() != vocab) throw Error(ErrorCode::kInvalidArgument, "unconditional policy size");
    if (ctx.rollouts.actions.empty()) throw Error(ErrorCode::kInvalidArgument, "no rollouts");
    RewardVars rv;
    rv.conditional = t.softmax_rows(logits, ctx.temperature);
    std::vector<std::size_t> cols;
    std::vector<double> ratio_coef, reward_coef;
    double gain = 0.0;
    for (std::size_t j = 0; j < ctx.rollouts.actions.size(); ++j) {
        const TokenId a = ctx.rollouts.actions[j];
        const double w = ctx.rollouts.weights[j];
        const double g = token_gain(a, *ctx.target, ctx.model->tok_emb, ctx.epsilon);
        const double inv = 1.0 / std::max(ctx.unconditional[static_cast<std::size_t>(a)], kProbabilityFloor);
        cols.push_back(static_cast<std::size_t>(a));
        ratio_coef.push_back(w * inv);
        reward_coef.push_back(w * g * inv);
        gain += w * g;
    }
    Var picked = t.gather_cols(rv.conditional, std::move(cols));
    rv.ratio = t.sum(t.mul_const(picked, std::move(ratio_coef)));
    Var weighted_gain = t.sum(t.mul_const(picked, std::move(reward_coef)));
    rv.gain = t.constant(Matrix(1, 1, gain));
    Matrix p(1, vocab);
    std::copy(ctx.unconditional.begin(), ctx.unconditional.end(), p.data.begin());
    rv.kl = t.kl(t.constant(std::move(p)), rv.conditional, kProbabilityFloor);
    rv.reward = t.add(weighted_gain, t.scale(rv.kl, -ctx.beta));
    return rv;
}

RewardParts read_parts(const Tape& t, const RewardVars& rv) {
    RewardParts parts;
    parts.reward = t.value(rv.reward).data[0];
    parts.gain = t.value(rv.gain).data[0];
    parts.ratio = t.value(rv.ratio).data[0];
    parts.kl = t.value(rv.kl).data[0];
    parts.conditional = t.value(rv.conditional).data;
    return parts;
}

}  // namespace

Var reward_graph(Tape& t, const CacheGraph& graph, const RewardContext& ctx) {
    return build_reward(t, graph.logits, ctx).reward;
}

RewardParts step_reward(const KvCache& theta_c, const RewardContext& ctx) {
    Tape t(false);
    const CacheGraph g = build_cache_graph(t, *ctx.model, theta_c);
    RewardParts parts = read_parts(t, build_reward(t, g.logits, ctx));
    parts.logits = t.value(g.logits).data;
    return parts;
}

RewardParts reward_from_logits(std::span<const double> logits, const RewardContext& ctx) {
    Tape t(false);
    Matrix l(1, logits.size());
    std::copy(logits.begin(), logits.end(), l.data.begin());
    RewardParts parts = read_parts(t, build_reward(t, t.constant(std::move(l)), ctx));
    parts.logits.assign(logits.begin(), logits.end());
    return parts;
}

std::optional<KvCache> normalized_step(const KvCache& theta_c, const KvCache& gradient, double eta) {
    if (!theta_c.same_shape(gradient)) throw Error(ErrorCode::kInvalidArgument, "gradient/cache shape mismatch");
    const double norm = std::sqrt(gradient.squared_norm());
    if (!(norm >= 1e-12)) return std::nullopt;
    KvCache next = theta_c;
    next.axpy(eta / norm, gradient);
    return next;
}

PolicyUpdate policy_update(const KvCache& theta, const RewardContext& ctx, std::size_t k, double eta) {
    PolicyUpdate out;
    out.theta_c = theta;
    const RewardBuilder builder = [&ctx](Tape& t, const CacheGraph& g) { return reward_graph(t, g, ctx); };
    auto fail = [&](std::string why) {
        out.theta_c = theta;
        out.fail_open = true;
        out.failure = std::move(why);
        return out;
    };
    for (std::size_t i = 0; i < k; ++i) {
        RewardGradient rg;
        try {
            rg = reward_gradient(*ctx.model, out.theta_c, builder);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::kNonFinite) throw;
            return fail(e.what());
        }
        out.gradient_norms.push_back(std::sqrt(rg.gradient.squared_norm()));
        auto next = normalized_step(out.theta_c, rg.gradient, eta);
        if (!next) {
            ++out.skipped;
            continue;
        }
        if (!next->all_finite()) return fail("perturbed cache is not finite");
        out.theta_c = std::move(*next);
    }
    return out;
}

double adapt_beta(double beta, double kl, double sigma) {
    if (kl >= 2.0 * sigma) return beta * 2.0;
    if (kl <= sigma / 2.0) return beta / 2.0;
    return beta;
}

std::string diagnostics_jsonl(const Generation& g, std::string_view id) {
    std::string out;
    for (const auto& s : g.steps) {
        nlohmann::ordered_json j;
        j["id"] = id;
        j["step"] = s.step;
        j["reward"] = s.reward;
        j["kl"] = s.kl;
        j["beta"] = s.beta;
        j["gain"] = s.gain;
        j["token"] = s.token;
        j["skipped"] = s.skipped;
        j["fail_open"] = s.fail_open;
        out += j.dump() + "\n";
    }
    return out;
}

DecodeSession::DecodeSession(const LmModel& model, const Vocab& vocab, GuideConfig cfg, std::uint64_t seed,
                             std::span<const TokenId> prompt)
    : model_(model),
      vocab_(vocab),
      cfg_(cfg),
      beta_(cfg.beta0),
      token_rng_(derive_seed(seed, 1)),
      rollout_rng_(derive_seed(seed, 2)) {
    cfg_.validate();
    if (vocab.size() != model.config.vocab_size) {
        throw Error(ErrorCode::kInvalidArgument, "vocabulary size does not match the model");
    }
    if (1 + prompt.size() + cfg_.max_len > model.config.context + 1) {
        throw Error(ErrorCode::kContextOverflow, "prompt plus max_len exceeds the model context");
    }
    theta_ = KvCache::empty(model.config);
    logits_ = step(model_, Vocab::kBos, theta_);
    for (TokenId tok : prompt) logits_ = step(model_, tok, theta_);
    theta_c_ = theta_;
}

TokenId DecodeSession::sample(std::span<const double> logits) {
    auto p = softmax_with_temperature(logits, cfg_.temperature);
    p[Vocab::kBos] = 0.0;
    p[Vocab::kUnk] = 0.0;
    double total = 0.0;
    for (double x : p) total += x;
    if (!(total > 0.0)) return Vocab::kEos;
    return static_cast<TokenId>(token_rng_.categorical(p));
}

void DecodeSession::advance(const LexiconTarget* target) {
    if (done_) return;
    StepRecord rec;
    rec.step = log_.size();
    rec.beta = beta_;
    const std::vector<double>* sample_logits = &logits_;
    std::vector<double> conditional_logits;
    theta_c_ = theta_;
    if (target) {
        RewardContext ctx;
        ctx.model = &model_;
        ctx.target = target;
        ctx.unconditional = softmax_with_temperature(logits_, cfg_.temperature);
        ctx.rollouts = sample_rollouts(ctx.unconditional, cfg_.num_rollouts, rollout_rng_);
        ctx.beta = beta_;
        ctx.temperature = cfg_.temperature;
        ctx.epsilon = cfg_.epsilon;
        RewardParts parts;
        if (cfg_.k > 0) {
            PolicyUpdate upd = policy_update(theta_, ctx, cfg_.k, cfg_.eta);
            rec.skipped = upd.skipped;
            rec.fail_open = upd.fail_open;
            if (upd.fail_open) {
                std::fprintf(stderr, "guide: step %zu fell back to unconditional decoding: %s\n", rec.step,
                             upd.failure.c_str());
            }
            theta_c_ = std::move(upd.theta_c);
        }
        if (cfg_.k > 0 && !rec.fail_open) {
            parts = step_reward(theta_c_, ctx);
            conditional_logits = std::move(parts.logits);
            sample_logits = &conditional_logits;
        } else {
            parts = reward_from_logits(logits_, ctx);
        }
        rec.reward = parts.reward;
        rec.kl = parts.kl;
        rec.gain = parts.gain;
        beta_ = adapt_beta(beta_, parts.kl, cfg_.sigma);
    }
    const TokenId token = sample(*sample_logits);
    rec.token = token;
    log_.push_back(rec);
    if (token == Vocab::kEos) {
        done_ = true;
        empty_ = tokens_.empty();
        return;
    }
    tokens_.push_back(token);
    if (tokens_.size() >= cfg_.max_len) {
        done_ = true;
        truncated_ = true;
        return;
    }
    // The perturbed cache carries forward; the new token's entries are
    // computed on top of it.
    theta_ = theta_c_;
    logits_ = step(model_, token, theta_);
}

Generation DecodeSession::finish() const {
    Generation g;
    g.tokens = tokens_;
    g.text = vocab_.decode(tokens_);
    g.empty = empty_;
    g.truncated = truncated_;
    g.steps = log_;
    return g;
}

Generation generate_conditional(const LmModel& model, const Vocab& vocab, const LexiconTarget& target,
                                const GuideConfig& cfg, std::uint64_t seed, std::span<const TokenId> prompt) {
    DecodeSession s(model, vocab, cfg, seed, prompt);
    while (!s.done()) s.advance(&target);
    return s.finish();
}

Generation generate_conditional(const LmModel& model, const Vocab& vocab, const Lexicon& lexicon,
                                std::string_view cls, const GuideConfig& cfg, std::uint64_t seed) {
    const LexiconTarget target = resolve_lexicon(lexicon, cls, vocab, model.tok_emb);
    return generate_conditional(model, vocab, target, cfg, seed);
}

Generation generate_unconditional(const LmModel& model, const Vocab& vocab, const GuideConfig& cfg,
                                  std::uint64_t seed, std::span<const TokenId> prompt) {
    DecodeSession s(model, vocab, cfg, seed, prompt);
    while (!s.done()) s.advance(nullptr);
    return s.finish();
}

}  // namespace databoost
