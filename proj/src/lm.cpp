// Copyright 2026 The databoost Authors
// SPDX-License-Identifier: Apache-2.0

#include "databoost/lm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "databoost/error.hpp"
#include "databoost/kernels.hpp"
#include "databoost/random.hpp"

namespace databoost {

using ad::KeyRange;
using ad::Tape;
using ad::Var;

namespace {

struct LayerVars {
    Var ln1_g, ln1_b, wq, wk, wv, wo, ln2_g, ln2_b, w1, b1, w2, b2;
};

struct ModelVars {
    Var tok_emb, pos_emb, lnf_g, lnf_b;
    std::vector<LayerVars> layers;
};

// Parameters enter the tape by reference; with grads == nullptr they are
// plain constants.
ModelVars bind(Tape& t, const LmModel& m, LmModel* grads) {
    auto p = [&](const Matrix& v, Matrix* g) { return t.param(v, g); };
    ModelVars mv;
    mv.tok_emb = p(m.tok_emb, grads ? &grads->tok_emb : nullptr);
    mv.pos_emb = p(m.pos_emb, grads ? &grads->pos_emb : nullptr);
    mv.lnf_g = p(m.lnf_g, grads ? &grads->lnf_g : nullptr);
    mv.lnf_b = p(m.lnf_b, grads ? &grads->lnf_b : nullptr);
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        const LayerParams& L = m.layers[l];
        LayerParams* G = grads ? &grads->layers[l] : nullptr;
        mv.layers.push_back({p(L.ln1_g, G ? &G->ln1_g : nullptr), p(L.ln1_b, G ? &G->ln1_b : nullptr),
                             p(L.wq, G ? &G->wq : nullptr), p(L.wk, G ? &G->wk : nullptr),
                             p(L.wv, G ? &G->wv : nullptr), p(L.wo, G ? &G->wo : nullptr),
                             p(L.ln2_g, G ? &G->ln2_g : nullptr), p(L.ln2_b, G ? &G->ln2_b : nullptr),
                             p(L.w1, G ? &G->w1 : nullptr), p(L.b1, G ? &G->b1 : nullptr),
                             p(L.w2, G ? &G->w2 : nullptr), p(L.b2, G ? &G->b2 : nullptr)});
    }
    return mv;
}

Var embed(Tape& t, const ModelVars& mv, std::vector<std::size_t> tokens, std::vector<std::size_t> positions) {
    return t.add(t.gather_rows(mv.tok_emb, std::move(tokens)), t.gather_rows(mv.pos_emb, std::move(positions)));
}

// x + Wo * attention, then x + MLP(LN2(x)).
Var finish_block(Tape& t, const LayerVars& L, Var x, Var att) {
    x = t.add(x, t.matmul_nt(att, L.wo));
    Var b = t.layer_norm(x, L.ln2_g, L.ln2_b);
    Var h = t.gelu(t.add_row(t.matmul_nt(b, L.w1), L.b1));
    return t.add(x, t.add_row(t.matmul_nt(h, L.w2), L.b2));
}

Var head(Tape& t, const ModelVars& mv, Var x) {
    return t.matmul_nt(t.layer_norm(x, mv.lnf_g, mv.lnf_b), mv.tok_emb);
}

// Full causal forward over concatenated segments. ranges[i] covers the
// causal window of row i inside its own segment.
Var forward_rows(Tape& t, const LmModel& m, const ModelVars& mv, std::vector<std::size_t> tokens,
                 std::vector<std::size_t> positions, const std::vector<KeyRange>& ranges) {
    Var x = embed(t, mv, std::move(tokens), std::move(positions));
    for (const LayerVars& L : mv.layers) {
        Var a = t.layer_norm(x, L.ln1_g, L.ln1_b);
        Var att = t.attention(t.matmul_nt(a, L.wq), t.matmul_nt(a, L.wk), t.matmul_nt(a, L.wv), m.config.n_heads, ranges);
        x = finish_block(t, L, x, att);
    }
    return head(t, mv, x);
}

void check_token(const LmModel& m, TokenId tok) {
    if (tok < 0 || static_cast<std::size_t>(tok) >= m.config.vocab_size) {
        throw Error(ErrorCode::kInvalidArgument, "token id " + std::to_string(tok) + " outside vocabulary");
    }
}

// Logits of the last cached position given cache Vars (keys/values per layer).
Var last_position_logits(Tape& t, const LmModel& m, const ModelVars& mv, const std::vector<Var>& keys,
                         const std::vector<Var>& values, TokenId last, std::size_t length) {
    Var x = embed(t, mv, {static_cast<std::size_t>(last)}, {length - 1});
    for (std::size_t l = 0; l < mv.layers.size(); ++l) {
        const LayerVars& L = mv.layers[l];
        Var a = t.layer_norm(x, L.ln1_g, L.ln1_b);
        Var att = t.attention(t.matmul_nt(a, L.wq), keys[l], values[l], m.config.n_heads, {KeyRange{0, length}});
        x = finish_block(t, L, x, att);
    }
    return head(t, mv, x);
}

void fill_normal(Matrix& m, Rng& rng, double std) {
    for (double& v : m.data) v = rng.normal() * std;
}

}  // namespace

// ---------------------------------------------------------------- LmModel

LmModel LmModel::zeros(const LmConfig& cfg) {
    LmModel m;
    m.config = cfg;
    const std::size_t d = cfg.d_model;
    m.tok_emb = Matrix(cfg.vocab_size, d);
    m.pos_emb = Matrix(cfg.context, d);
    m.lnf_g = Matrix(1, d);
    m.lnf_b = Matrix(1, d);
    for (std::size_t l = 0; l < cfg.n_layers; ++l) {
        LayerParams L;
        L.ln1_g = Matrix(1, d);
        L.ln1_b = Matrix(1, d);
        L.wq = Matrix(d, d);
        L.wk = Matrix(d, d);
        L.wv = Matrix(d, d);
        L.wo = Matrix(d, d);
        L.ln2_g = Matrix(1, d);
        L.ln2_b = Matrix(1, d);
        L.w1 = Matrix(cfg.d_ff, d);
        L.b1 = Matrix(1, cfg.d_ff);
        L.w2 = Matrix(d, cfg.d_ff);
        L.b2 = Matrix(1, d);
        m.layers.push_back(std::move(L));
    }
    return m;
}

LmModel LmModel::init(const LmConfig& cfg, std::uint64_t seed) {
    if (cfg.vocab_size < 4 || cfg.d_model == 0 || cfg.n_layers == 0 || cfg.n_heads == 0 ||
        cfg.d_model % cfg.n_heads != 0 || cfg.d_ff == 0) {
        throw Error(ErrorCode::kInvalidArgument, "invalid LM hyperparameters");
    }
    if (cfg.context < 31) throw Error(ErrorCode::kInvalidArgument, "context length must be >= 31");
    LmModel m = zeros(cfg);
    Rng rng(seed);
    const double std = 0.02;
    const double proj_std = std / std::sqrt(2.0 * static_cast<double>(cfg.n_layers));
    fill_normal(m.tok_emb, rng, std);
    fill_normal(m.pos_emb, rng, std * 0.5);
    std::fill(m.lnf_g.data.begin(), m.lnf_g.data.end(), 1.0);
    for (auto& L : m.layers) {
        std::fill(L.ln1_g.data.begin(), L.ln1_g.data.end(), 1.0);
        std::fill(L.ln2_g.data.begin(), L.ln2_g.data.end(), 1.0);
        fill_normal(L.wq, rng, std);
        fill_normal(L.wk, rng, std);
        fill_normal(L.wv, rng, std);
        fill_normal(L.wo, rng, proj_std);
        fill_normal(L.w1, rng, std);
        fill_normal(L.w2, rng, proj_std);
    }
    return m;
}

std::vector<Matrix*> LmModel::parameters() {
    std::vector<Matrix*> out{&tok_emb, &pos_emb};
    for (auto& L : layers) {
        for (Matrix* p : {&L.ln1_g, &L.ln1_b, &L.wq, &L.wk, &L.wv, &L.wo, &L.ln2_g, &L.ln2_b, &L.w1, &L.b1, &L.w2, &L.b2}) {
            out.push_back(p);
        }
    }
    out.push_back(&lnf_g);
    out.push_back(&lnf_b);
    return out;
}

std::vector<const Matrix*> LmModel::parameters() const {
    auto mut = const_cast<LmModel*>(this)->parameters();
    return {mut.begin(), mut.end()};
}

std::size_t LmModel::num_parameters() const {
    std::size_t n = 0;
    for (const Matrix* p : parameters()) n += p->size();
    return n;
}

void LmModel::validate() const {
    const LmModel ref = zeros(config);
    const auto mine = parameters();
    const auto want = ref.parameters();
    if (mine.size() != want.size()) throw Error(ErrorCode::kInvalidArgument, "parameter count mismatch");
    for (std::size_t i = 0; i < mine.size(); ++i) {
        if (!mine[i]->same_shape(*want[i])) {
            throw Error(ErrorCode::kInvalidArgument, "parameter block " + std::to_string(i) + " has wrong shape");
        }
        for (double v : mine[i]->data) {
            if (!std::isfinite(v)) throw Error(ErrorCode::kNonFinite, "non-finite parameter in block " + std::to_string(i));
        }
    }
    if (config.context < 31) throw Error(ErrorCode::kInvalidArgument, "context length must be >= 31");
}

// Checkpoint layout (little-endian):
//   bytes 0..3   magic "DBLM"
//   u32          format version (1)
//   u32 x 6      vocab_size, d_model, n_layers, n_heads, context, d_ff
//   u32          number of parameter blocks
//   per block:   u64 rows, u64 cols, rows*cols f64 row-major
namespace {

constexpr char kMagic[4] = {'D', 'B', 'L', 'M'};
constexpr std::uint32_t kVersion = 1;
static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

template <class T>
void put(std::vector<std::uint8_t>& out, T v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    out.insert(out.end(), p, p + sizeof(T));
}

template <class T>
T get(std::span<const std::uint8_t> bytes, std::size_t& pos) {
    if (pos + sizeof(T) > bytes.size()) throw Error(ErrorCode::kBadCheckpoint, "truncated checkpoint");
    T v;
    std::memcpy(&v, bytes.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

}  // namespace

std::vector<std::uint8_t> LmModel::serialize() const {
    std::vector<std::uint8_t> out(kMagic, kMagic + 4);
    put<std::uint32_t>(out, kVersion);
    for (std::size_t v : {config.vocab_size, config.d_model, config.n_layers, config.n_heads, config.context, config.d_ff}) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(v));
    }
    const auto params = parameters();
    put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
    for (const Matrix* p : params) {
        put<std::uint64_t>(out, p->rows);
        put<std::uint64_t>(out, p->cols);
        const auto* b = reinterpret_cast<const std::uint8_t*>(p->data.data());
        out.insert(out.end(), b, b + p->size() * sizeof(double));
    }
    return out;
}

LmModel LmModel::deserialize(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw Error(ErrorCode::kBadCheckpoint, "bad magic");
    }
    std::size_t pos = 4;
    const auto version = get<std::uint32_t>(bytes, pos);
    if (version != kVersion) throw Error(ErrorCode::kBadCheckpoint, "unsupported version " + std::to_string(version));
    LmConfig cfg;
    cfg.vocab_size = get<std::uint32_t>(bytes, pos);
    cfg.d_model = get<std::uint32_t>(bytes, pos);
    cfg.n_layers = get<std::uint32_t>(bytes, pos);
    cfg.n_heads = get<std::uint32_t>(bytes, pos);
    cfg.context = get<std::uint32_t>(bytes, pos);
    cfg.d_ff = get<std::uint32_t>(bytes, pos);
    if (cfg.n_heads == 0 || cfg.d_model % cfg.n_heads != 0 || cfg.n_layers > 64) {
        throw Error(ErrorCode::kBadCheckpoint, "inconsistent hyperparameters");
    }
    LmModel m = zeros(cfg);
    auto params = m.parameters();
    const auto nblocks = get<std::uint32_t>(bytes, pos);
    if (nblocks != params.size()) throw Error(ErrorCode::kBadCheckpoint, "parameter block count mismatch");
    for (Matrix* p : params) {
        const auto rows = get<std::uint64_t>(bytes, pos);
        const auto cols = get<std::uint64_t>(bytes, pos);
        if (rows != p->rows || cols != p->cols) throw Error(ErrorCode::kBadCheckpoint, "block shape mismatch");
        const std::size_t nbytes = p->size() * sizeof(double);
        if (pos + nbytes > bytes.size()) throw Error(ErrorCode::kBadCheckpoint, "truncated checkpoint");
        std::memcpy(p->data.data(), bytes.data() + pos, nbytes);
        pos += nbytes;
    }
    if (pos != bytes.size()) throw Error(ErrorCode::kBadCheckpoint, "trailing bytes");
    m.validate();
    return m;
}

void LmModel::save(const std::filesystem::path& path) const {
    const auto bytes = serialize();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

LmModel LmModel::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

// ---------------------------------------------------------------- KvCache

KvCache KvCache::empty(const LmConfig& cfg) {
    KvCache c;
    for (std::size_t l = 0; l < cfg.n_layers; ++l) {
        c.keys.emplace_back(0, cfg.d_model);
        c.values.emplace_back(0, cfg.d_model);
    }
    return c;
}

std::size_t KvCache::num_entries() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < keys.size(); ++l) n += keys[l].size() + values[l].size();
    return n;
}

bool KvCache::same_shape(const KvCache& o) const {
    if (keys.size() != o.keys.size()) return false;
    for (std::size_t l = 0; l < keys.size(); ++l) {
        if (!keys[l].same_shape(o.keys[l]) || !values[l].same_shape(o.values[l])) return false;
    }
    return true;
}

void KvCache::axpy(double alpha, const KvCache& other) {
    if (!same_shape(other)) throw Error(ErrorCode::kInvalidArgument, "cache shape mismatch");
    const auto& kt = kernels::active_table();
    for (std::size_t l = 0; l < keys.size(); ++l) {
        kt.axpy(alpha, other.keys[l].data.data(), keys[l].data.data(), keys[l].size());
        kt.axpy(alpha, other.values[l].data.data(), values[l].data.data(), values[l].size());
    }
}

double KvCache::squared_norm() const {
    const auto& kt = kernels::active_table();
    double s = 0.0;
    for (std::size_t l = 0; l < keys.size(); ++l) {
        s += kt.dot(keys[l].data.data(), keys[l].data.data(), keys[l].size());
        s += kt.dot(values[l].data.data(), values[l].data.data(), values[l].size());
    }
    return s;
}

bool KvCache::all_finite() const {
    for (std::size_t l = 0; l < keys.size(); ++l) {
        for (const Matrix* m : {&keys[l], &values[l]}) {
            for (double v : m->data) {
                if (!std::isfinite(v)) return false;
            }
        }
    }
    return true;
}

// ---------------------------------------------------------------- decoding

std::vector<double> step(const LmModel& m, TokenId token, KvCache& cache) {
    check_token(m, token);
    if (cache.keys.size() != m.config.n_layers) throw Error(ErrorCode::kInvalidArgument, "cache/model layer mismatch");
    const std::size_t pos = cache.length();
    if (pos >= m.config.context) {
        throw Error(ErrorCode::kContextOverflow, "prefix length " + std::to_string(pos) + " reached context " +
                                                      std::to_string(m.config.context));
    }
    Tape t(false);
    const ModelVars mv = bind(t, m, nullptr);
    Var x = embed(t, mv, {static_cast<std::size_t>(token)}, {pos});
    for (std::size_t l = 0; l < mv.layers.size(); ++l) {
        const LayerVars& L = mv.layers[l];
        Var a = t.layer_norm(x, L.ln1_g, L.ln1_b);
        cache.keys[l].append_row(t.value(t.matmul_nt(a, L.wk)).row(0));
        cache.values[l].append_row(t.value(t.matmul_nt(a, L.wv)).row(0));
        Var att = t.attention(t.matmul_nt(a, L.wq), t.constant_ref(cache.keys[l]), t.constant_ref(cache.values[l]),
                              m.config.n_heads, {KeyRange{0, pos + 1}});
        x = finish_block(t, L, x, att);
    }
    cache.last_token = token;
    return t.value(head(t, mv, x)).data;
}

std::vector<double> logits_from_cache(const LmModel& m, const KvCache& cache) {
    if (cache.length() == 0) throw Error(ErrorCode::kInvalidArgument, "empty cache has no last position");
    Tape t(false);
    const ModelVars mv = bind(t, m, nullptr);
    std::vector<Var> keys, values;
    for (std::size_t l = 0; l < cache.keys.size(); ++l) {
        keys.push_back(t.constant_ref(cache.keys[l]));
        values.push_back(t.constant_ref(cache.values[l]));
    }
    return t.value(last_position_logits(t, m, mv, keys, values, cache.last_token, cache.length())).data;
}

Matrix forward_sequence(const LmModel& m, std::span<const TokenId> tokens) {
    if (tokens.empty()) throw Error(ErrorCode::kInvalidArgument, "empty sequence");
    if (tokens.size() > m.config.context) throw Error(ErrorCode::kContextOverflow, "sequence longer than context");
    Tape t(false);
    const ModelVars mv = bind(t, m, nullptr);
    std::vector<std::size_t> toks, pos;
    std::vector<KeyRange> ranges;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        check_token(m, tokens[i]);
        toks.push_back(static_cast<std::size_t>(tokens[i]));
        pos.push_back(i);
        ranges.push_back({0, i + 1});
    }
    return t.value(forward_rows(t, m, mv, std::move(toks), std::move(pos), ranges));
}

std::vector<double> prefill(const LmModel& m, std::span<const TokenId> tokens, KvCache& cache) {
    cache = KvCache::empty(m.config);
    std::vector<double> logits;
    for (TokenId tok : tokens) logits = step(m, tok, cache);
    return logits;
}

std::vector<double> softmax_with_temperature(std::span<const double> logits, double temperature) {
    if (!(temperature > 0.0)) throw Error(ErrorCode::kInvalidArgument, "temperature must be > 0");
    if (logits.empty()) return {};
    std::vector<double> p(logits.size());
    const double mx = *std::max_element(logits.begin(), logits.end());
    if (!std::isfinite(mx)) throw Error(ErrorCode::kNonFinite, "non-finite logits");
    double z = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp((logits[i] - mx) / temperature);
        z += p[i];
    }
    for (double& v : p) v /= z;
    return p;
}

// ---------------------------------------------------------------- reward gradient

CacheGraph build_cache_graph(Tape& t, const LmModel& m, const KvCache& cache) {
    if (cache.length() == 0) throw Error(ErrorCode::kInvalidArgument, "empty cache");
    if (cache.keys.size() != m.config.n_layers) throw Error(ErrorCode::kInvalidArgument, "cache/model layer mismatch");
    const ModelVars mv = bind(t, m, nullptr);
    CacheGraph g;
    for (std::size_t l = 0; l < cache.keys.size(); ++l) {
        g.keys.push_back(t.leaf(cache.keys[l]));
        g.values.push_back(t.leaf(cache.values[l]));
    }
    g.logits = last_position_logits(t, m, mv, g.keys, g.values, cache.last_token, cache.length());
    return g;
}

RewardGradient reward_gradient(const LmModel& m, const KvCache& cache, const RewardBuilder& reward) {
    Tape t(true);
    const CacheGraph g = build_cache_graph(t, m, cache);
    const Var r = reward(t, g);
    RewardGradient out;
    out.value = t.value(r).data.at(0);
    if (!std::isfinite(out.value)) throw Error(ErrorCode::kNonFinite, "reward is not finite");
    t.backward(r);
    out.gradient.last_token = cache.last_token;
    for (std::size_t l = 0; l < cache.keys.size(); ++l) {
        out.gradient.keys.push_back(t.grad(g.keys[l]));
        out.gradient.values.push_back(t.grad(g.values[l]));
    }
    if (!out.gradient.all_finite()) throw Error(ErrorCode::kNonFinite, "reward gradient is not finite");
    return out;
}

double reward_value(const LmModel& m, const KvCache& cache, const RewardBuilder& reward) {
    Tape t(false);
    const CacheGraph g = build_cache_graph(t, m, cache);
    return t.value(reward(t, g)).data.at(0);
}

// ---------------------------------------------------------------- training

std::vector<std::vector<TokenId>> encode_dataset(const Dataset& ds, const Vocab& vocab, const PreprocessConfig& cfg) {
    std::vector<std::vector<TokenId>> out;
    for (const auto& ex : ds.examples()) {
        auto ids = preprocess_ids(ex.text, cfg, vocab);
        if (!ids) continue;
        std::vector<TokenId> seq{Vocab::kBos};
        seq.insert(seq.end(), ids->begin(), ids->end());
        seq.push_back(Vocab::kEos);
        out.push_back(std::move(seq));
    }
    return out;
}

namespace {

struct Batch {
    std::vector<std::size_t> tokens, positions, targets;
    std::vector<KeyRange> ranges;
};

void append_sequence(Batch& b, const std::vector<TokenId>& seq, std::size_t context) {
    // Inputs are seq[0..n-2], targets seq[1..n-1]; clip to the context window.
    const std::size_t n = std::min(seq.size() - 1, context);
    const std::size_t start = b.tokens.size();
    for (std::size_t i = 0; i < n; ++i) {
        b.tokens.push_back(static_cast<std::size_t>(seq[i]));
        b.positions.push_back(i);
        b.targets.push_back(static_cast<std::size_t>(seq[i + 1]));
        b.ranges.push_back({start, start + i + 1});
    }
}

double batch_loss(const LmModel& m, const Batch& b, LmModel* grads) {
    Tape t(grads != nullptr);
    const ModelVars mv = bind(t, m, grads);
    Var logits = forward_rows(t, m, mv, b.tokens, b.positions, b.ranges);
    Var loss = t.cross_entropy(logits, b.targets);
    const double v = t.value(loss).data[0];
    if (grads && std::isfinite(v)) t.backward(loss);
    return v;
}

}  // namespace

double mean_cross_entropy(const LmModel& m, const std::vector<std::vector<TokenId>>& sequences) {
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& seq : sequences) {
        if (seq.size() < 2) continue;
        Batch b;
        append_sequence(b, seq, m.config.context);
        total += batch_loss(m, b, nullptr) * static_cast<double>(b.targets.size());
        count += b.targets.size();
    }
    if (count == 0) throw Error(ErrorCode::kEmptyCorpus, "no tokens to score");
    return total / static_cast<double>(count);
}

double nn_perplexity(const LmModel& m, const std::vector<std::vector<TokenId>>& sequences) {
    return std::exp(mean_cross_entropy(m, sequences));
}

double nn_perplexity(const LmModel& m, const Dataset& ds, const Vocab& vocab, const PreprocessConfig& cfg) {
    return nn_perplexity(m, encode_dataset(ds, vocab, cfg));
}

LmModel train_lm_sequences(const std::vector<std::vector<TokenId>>& sequences, const TrainConfig& cfg,
                           TrainStats* stats) {
    if (sequences.empty()) throw Error(ErrorCode::kEmptyCorpus, "no training sequences");
    if (cfg.epochs == 0 || cfg.batch_size == 0) throw Error(ErrorCode::kInvalidArgument, "epochs and batch_size must be >= 1");
    LmModel model = LmModel::init(cfg.model, cfg.seed);

    // Deterministic held-out slice; tiny corpora are scored on themselves.
    std::vector<std::size_t> order(sequences.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(derive_seed(cfg.seed, 7));
    std::vector<std::vector<TokenId>> train, holdout;
    const auto n_hold = static_cast<std::size_t>(std::ceil(cfg.holdout_fraction * static_cast<double>(sequences.size())));
    if (sequences.size() >= 20 && n_hold > 0) {
        rng.shuffle(order);
        for (std::size_t i = 0; i < order.size(); ++i) (i < n_hold ? holdout : train).push_back(sequences[order[i]]);
    } else {
        train = sequences;
        holdout = sequences;
    }

    TrainStats st;
    st.sequences = train.size();
    st.initial_loss = mean_cross_entropy(model, holdout);

    LmModel grads = LmModel::zeros(cfg.model);
    LmModel m1 = LmModel::zeros(cfg.model);
    LmModel m2 = LmModel::zeros(cfg.model);
    auto params = model.parameters();
    auto gparams = grads.parameters();
    auto m1p = m1.parameters();
    auto m2p = m2.parameters();
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;

    std::vector<std::size_t> idx(train.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::size_t step_no = 0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(idx);
        for (std::size_t start = 0; start < idx.size(); start += cfg.batch_size) {
            Batch b;
            for (std::size_t j = start; j < std::min(idx.size(), start + cfg.batch_size); ++j) {
                append_sequence(b, train[idx[j]], cfg.model.context);
            }
            if (b.tokens.empty()) continue;
            for (Matrix* g : gparams) g->set_zero();
            const double loss = batch_loss(model, b, &grads);
            ++step_no;
            if (!std::isfinite(loss)) {
                throw Error(ErrorCode::kDivergence,
                            "loss became non-finite at epoch " + std::to_string(epoch) + " step " + std::to_string(step_no));
            }
            st.last_train_loss = loss;
            double norm2 = 0.0;
            for (const Matrix* g : gparams) {
                for (double v : g->data) norm2 += v * v;
            }
            const double norm = std::sqrt(norm2);
            if (!std::isfinite(norm)) {
                throw Error(ErrorCode::kDivergence,
                            "gradient became non-finite at epoch " + std::to_string(epoch) + " step " + std::to_string(step_no));
            }
            const double clip = (cfg.grad_clip > 0.0 && norm > cfg.grad_clip) ? cfg.grad_clip / norm : 1.0;
            const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(step_no));
            const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(step_no));
            for (std::size_t p = 0; p < params.size(); ++p) {
                auto& w = params[p]->data;
                const auto& g = gparams[p]->data;
                auto& a = m1p[p]->data;
                auto& v = m2p[p]->data;
                for (std::size_t i = 0; i < w.size(); ++i) {
                    const double gi = g[i] * clip;
                    a[i] = kBeta1 * a[i] + (1.0 - kBeta1) * gi;
                    v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * gi * gi;
                    w[i] -= cfg.learning_rate * (a[i] / bc1) / (std::sqrt(v[i] / bc2) + kEps);
                }
            }
        }
    }
    st.steps = step_no;
    st.final_loss = mean_cross_entropy(model, holdout);
    if (!std::isfinite(st.final_loss)) throw Error(ErrorCode::kDivergence, "held-out loss is non-finite after training");
    if (stats) *stats = st;
    return model;
}

LmModel train_lm(const Dataset& train, const Vocab& vocab, const PreprocessConfig& pcfg, const TrainConfig& cfg,
                 TrainStats* stats) {
    TrainConfig c = cfg;
    c.model.vocab_size = vocab.size();
    auto seqs = encode_dataset(train, vocab, pcfg);
    if (seqs.empty()) throw Error(ErrorCode::kEmptyCorpus, "no sequences after preprocessing");
    return train_lm_sequences(seqs, c, stats);
}

}  // namespace databoost
