// Copyright 2026 The databoost Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "databoost/error.hpp"
#include "databoost/lm.hpp"
#include "databoost/random.hpp"

using namespace databoost;

namespace {

LmConfig small_config(std::size_t vocab = 12) {
    LmConfig c;
    c.vocab_size = vocab;
    c.d_model = 16;
    c.n_layers = 2;
    c.n_heads = 2;
    c.context = 32;
    c.d_ff = 32;
    return c;
}

KvCache random_prefix_cache(const LmModel& m, Rng& rng, std::size_t len) {
    KvCache cache = KvCache::empty(m.config);
    step(m, Vocab::kBos, cache);
    for (std::size_t i = 1; i < len; ++i) {
        step(m, static_cast<TokenId>(rng.below(m.config.vocab_size)), cache);
    }
    return cache;
}

}  // namespace

TEST_CASE("softmax with temperature") {
    auto p = softmax_with_temperature(std::vector<double>{1.0, 2.0}, 1.0);
    CHECK(p[0] == doctest::Approx(0.2689).epsilon(1e-4));
    CHECK(p[1] == doctest::Approx(0.7311).epsilon(1e-4));
    CHECK(softmax_with_temperature(std::vector<double>{1.0, 2.0}, 0.01)[1] > 1.0 - 1e-9);
    auto u = softmax_with_temperature(std::vector<double>{3.0, 3.0, 3.0, 3.0}, 0.3);
    for (double x : u) CHECK(x == doctest::Approx(0.25));
    CHECK_THROWS_AS(softmax_with_temperature(std::vector<double>{1.0}, 0.0), Error);
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> z(7);
        for (auto& x : z) x = 5 * rng.normal();
        const double t = 0.05 + 3 * rng.uniform();
        auto q = softmax_with_temperature(z, t);
        double s = 0.0;
        for (double x : q) s += x;
        CHECK(std::abs(s - 1.0) <= 1e-9);
        CHECK(std::max_element(q.begin(), q.end()) - q.begin() == std::max_element(z.begin(), z.end()) - z.begin());
    }
}

TEST_CASE("incremental decoding agrees with the full-prefix forward pass") {
    LmModel m = LmModel::init(small_config(), 42);
    Rng rng(9);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<TokenId> toks{Vocab::kBos};
        for (int i = 0; i < 9; ++i) toks.push_back(static_cast<TokenId>(rng.below(12)));
        Matrix full = forward_sequence(m, toks);
        KvCache cache = KvCache::empty(m.config);
        for (std::size_t i = 0; i < toks.size(); ++i) {
            auto logits = step(m, toks[i], cache);
            CHECK(cache.length() == i + 1);
            for (std::size_t v = 0; v < logits.size(); ++v) worst = std::max(worst, std::abs(logits[v] - full(i, v)));
            // Recomputing from the cache gives the same logits.
            auto again = logits_from_cache(m, cache);
            for (std::size_t v = 0; v < logits.size(); ++v) CHECK(again[v] == logits[v]);
        }
    }
    CHECK(worst <= 1e-5);
}

TEST_CASE("context overflow") {
    LmConfig cfg = small_config();
    cfg.context = 31;
    LmModel m = LmModel::init(cfg, 1);
    KvCache cache = KvCache::empty(cfg);
    for (int i = 0; i < 31; ++i) step(m, 3, cache);
    try {
        step(m, 3, cache);
        FAIL("expected ContextOverflow");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::kContextOverflow);
    }
}

TEST_CASE("BOS on an empty cache gives a valid distribution") {
    LmModel m = LmModel::init(small_config(), 5);
    KvCache cache = KvCache::empty(m.config);
    auto p = softmax_with_temperature(step(m, Vocab::kBos, cache), 1.0);
    double s = 0.0;
    for (double x : p) {
        CHECK(x > 0.0);
        s += x;
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("reward gradient: constant, linear and finite differences") {
    LmModel m = LmModel::init(small_config(), 7);
    Rng rng(10);
    KvCache cache = random_prefix_cache(m, rng, 5);

    auto constant = reward_gradient(m, cache, [](ad::Tape& t, const CacheGraph&) {
        return t.constant(Matrix(1, 1, 3.0));
    });
    CHECK(constant.value == 3.0);
    CHECK(constant.gradient.squared_norm() == 0.0);

    // Linear functional on one value entry: gradient is the unit vector.
    auto linear = reward_gradient(m, cache, [](ad::Tape& t, const CacheGraph& g) {
        Matrix a(t.value(g.values[1]).rows, t.value(g.values[1]).cols);
        a(2, 3) = 1.0;
        return t.frobenius_dot(g.values[1], a);
    });
    CHECK(linear.gradient.values[1](2, 3) == 1.0);
    CHECK(linear.gradient.squared_norm() == 1.0);

    // Nonlinear reward through the recomputed logits.
    auto reward = [](ad::Tape& t, const CacheGraph& g) {
        ad::Var p = t.softmax_rows(g.logits, 0.8);
        return t.sum(t.log(t.gather_cols(p, {3, 5})));
    };
    auto rg = reward_gradient(m, cache, reward);
    const double h = 1e-5;
    double worst = 0.0;
    for (std::size_t l = 0; l < cache.keys.size(); ++l) {
        for (int which = 0; which < 2; ++which) {
            const std::size_t n = (which ? cache.values[l] : cache.keys[l]).size();
            for (std::size_t i = 0; i < n; i += 3) {
                KvCache plus = cache, minus = cache;
                (which ? plus.values[l] : plus.keys[l]).data[i] += h;
                (which ? minus.values[l] : minus.keys[l]).data[i] -= h;
                const double fd = (reward_value(m, plus, reward) - reward_value(m, minus, reward)) / (2 * h);
                const double ad = (which ? rg.gradient.values[l] : rg.gradient.keys[l]).data[i];
                worst = std::max(worst, std::abs(fd - ad) / std::max(1e-3, std::abs(fd)));
            }
        }
    }
    CHECK(worst <= 1e-4);
}

TEST_CASE("checkpoint round trip and corruption") {
    LmModel m = LmModel::init(small_config(), 3);
    auto bytes = m.serialize();
    LmModel back = LmModel::deserialize(bytes);
    CHECK(back.serialize() == bytes);
    CHECK(back.config == m.config);
    auto path = std::filesystem::temp_directory_path() / "databoost_lm_test.bin";
    m.save(path);
    CHECK(LmModel::load(path).serialize() == bytes);
    std::filesystem::remove(path);
    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(LmModel::deserialize(bad), Error);
    bytes.resize(bytes.size() - 8);
    CHECK_THROWS_AS(LmModel::deserialize(bytes), Error);
}

TEST_CASE("uniform model has perplexity equal to the vocabulary size") {
    LmModel z = LmModel::zeros(small_config(9));
    std::vector<std::vector<TokenId>> seqs{{0, 4, 5, 1}, {0, 3, 1}};
    CHECK(nn_perplexity(z, seqs) == doctest::Approx(9.0).epsilon(1e-9));
}

TEST_CASE("training memorizes a single sentence and is deterministic") {
    std::vector<std::vector<TokenId>> seqs(8, std::vector<TokenId>{0, 3, 4, 5, 6, 7, 1});
    TrainConfig tc;
    tc.model = small_config(8);
    tc.epochs = 200;
    tc.batch_size = 8;
    tc.learning_rate = 1e-2;
    tc.holdout_fraction = 0.0;
    TrainStats st;
    LmModel m = train_lm_sequences(seqs, tc, &st);
    CHECK(st.final_loss < st.initial_loss);
    CHECK(nn_perplexity(m, {seqs[0]}) < 1.05);
    TrainStats st2;
    LmModel m2 = train_lm_sequences(seqs, tc, &st2);
    CHECK(m2.serialize() == m.serialize());
    CHECK(st2.final_loss == st.final_loss);
}

TEST_CASE("perplexity is invariant to sequence order") {
    LmModel m = LmModel::init(small_config(), 11);
    std::vector<std::vector<TokenId>> a{{0, 3, 4, 1}, {0, 5, 1}, {0, 6, 7, 8, 1}};
    std::vector<std::vector<TokenId>> b{a[2], a[0], a[1]};
    CHECK(nn_perplexity(m, a) == doctest::Approx(nn_perplexity(m, b)).epsilon(1e-12));
    CHECK(nn_perplexity(m, a) >= 1.0);
}
