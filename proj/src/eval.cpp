// Copyright 2026 The databoost Authors
// SPDX-License-Identifier: Apache-2.0

#include "databoost/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include <boost/math/distributions/students_t.hpp>

#include "databoost/error.hpp"
#include "databoost/kernels.hpp"
#include "databoost/ngram.hpp"
#include "databoost/random.hpp"
#include "databoost/salience.hpp"

#ifndef DATABOOST_VERSION
#define DATABOOST_VERSION "unknown"
#endif

namespace databoost {

namespace kn = databoost::kernels;

// ================================================================ synthetic corpus

void SynthConfig::read(ConfigReader& r, const std::string& p) {
    num_classes = r.count(p + "num_classes", num_classes);
    examples = r.count(p + "examples", examples);
    markers_per_class = r.count(p + "markers_per_class", markers_per_class);
    filler_words = r.count(p + "filler_words", filler_words);
    marker_rate = r.real(p + "marker_rate", marker_rate);
    noise = r.real(p + "noise", noise);
    zipf_exponent = r.real(p + "zipf_exponent", zipf_exponent);
    min_len = r.count(p + "min_len", min_len);
    max_len = r.count(p + "max_len", max_len);
    seed = r.u64(p + "seed", seed);
    if (num_classes < 2 || num_classes > 8) r.error(p + "num_classes must be in 2..8");
    if (min_len < 1 || max_len < min_len || max_len > 30) r.error(p + "need 1 <= min_len <= max_len <= 30");
    if (markers_per_class < 1 || filler_words < 4) r.error(p + "need markers_per_class >= 1, filler_words >= 4");
}

void SynthConfig::write(KeyValues& kv, const std::string& p) const {
    kv[p + "num_classes"] = std::to_string(num_classes);
    kv[p + "examples"] = std::to_string(examples);
    kv[p + "markers_per_class"] = std::to_string(markers_per_class);
    kv[p + "filler_words"] = std::to_string(filler_words);
    kv[p + "marker_rate"] = format_real(marker_rate);
    kv[p + "noise"] = format_real(noise);
    kv[p + "zipf_exponent"] = format_real(zipf_exponent);
    kv[p + "min_len"] = std::to_string(min_len);
    kv[p + "max_len"] = std::to_string(max_len);
    kv[p + "seed"] = std::to_string(seed);
}

namespace {

const char* const kClassNames[] = {"alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta"};
const char* const kNoiseWords[] = {"the", "a", "is", "and", "of", "to", "very", "so", "it", "this"};

struct SynthLexicon {
    std::vector<std::vector<std::string>> markers;
    std::vector<std::string> fillers;
};

SynthLexicon make_synth_lexicon(const SynthConfig& cfg) {
    static const std::string consonants = "bdfgklmnprstvz";
    static const std::string vowels = "aeiou";
    Rng rng(derive_seed(cfg.seed, 0));
    std::set<std::string> used(default_stopwords().begin(), default_stopwords().end());
    auto word = [&] {
        while (true) {
            std::string w;
            const std::size_t syllables = 2 + rng.below(2);
            for (std::size_t s = 0; s < syllables; ++s) {
                w.push_back(consonants[rng.below(consonants.size())]);
                w.push_back(vowels[rng.below(vowels.size())]);
            }
            if (rng.uniform() < 0.4) w.push_back(consonants[rng.below(consonants.size())]);
            if (used.insert(w).second) return w;
        }
    };
    SynthLexicon lex;
    lex.markers.resize(cfg.num_classes);
    for (auto& m : lex.markers)
        for (std::size_t i = 0; i < cfg.markers_per_class; ++i) m.push_back(word());
    for (std::size_t i = 0; i < cfg.filler_words; ++i) lex.fillers.push_back(word());
    return lex;
}

}  // namespace

std::vector<std::vector<std::string>> synth_markers(const SynthConfig& cfg) { return make_synth_lexicon(cfg).markers; }

Dataset synth_corpus(const SynthConfig& cfg) {
    if (cfg.num_classes < 2 || cfg.num_classes > std::size(kClassNames)) {
        throw Error(ErrorCode::kInvalidArgument, "synthetic corpus supports 2..8 classes");
    }
    if (cfg.min_len < 1 || cfg.max_len < cfg.min_len) throw Error(ErrorCode::kInvalidArgument, "bad length range");
    const SynthLexicon lex = make_synth_lexicon(cfg);
    Rng rng(derive_seed(cfg.seed, 1));
    std::vector<double> zipf;
    for (std::size_t r = 0; r < cfg.markers_per_class; ++r) {
        zipf.push_back(1.0 / std::pow(static_cast<double>(r + 1), cfg.zipf_exponent));
    }
    // Sparse filler transitions: three preferred successors per word.
    std::vector<std::array<std::size_t, 3>> succ(cfg.filler_words);
    for (auto& s : succ)
        for (auto& x : s) x = rng.below(cfg.filler_words);

    std::vector<std::string> classes;
    for (std::size_t c = 0; c < cfg.num_classes; ++c) classes.emplace_back(kClassNames[c]);
    std::vector<LabeledExample> rows;
    for (std::size_t i = 0; i < cfg.examples; ++i) {
        const std::size_t c = i % cfg.num_classes;
        const std::size_t len = cfg.min_len + rng.below(cfg.max_len - cfg.min_len + 1);
        const std::size_t forced = rng.below(len);
        std::size_t filler = rng.below(cfg.filler_words);
        std::string text;
        auto emit = [&](const std::string& w) {
            if (!text.empty()) text.push_back(' ');
            text += w;
        };
        for (std::size_t pos = 0; pos < len; ++pos) {
            if (rng.uniform() < 0.3) emit(kNoiseWords[rng.below(std::size(kNoiseWords))]);
            std::string w;
            if (pos == forced || rng.uniform() < cfg.marker_rate) {
                std::size_t mc = c;
                if (rng.uniform() < cfg.noise) mc = (c + 1 + rng.below(cfg.num_classes - 1)) % cfg.num_classes;
                w = lex.markers[mc][rng.categorical(zipf)];
            } else {
                filler = rng.uniform() < 0.75 ? succ[filler][rng.below(3)] : rng.below(cfg.filler_words);
                w = lex.fillers[filler];
            }
            if (pos == 0) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
            const double u = rng.uniform();
            if (u < 0.05) w += "!";
            else if (u < 0.10) w += ",";
            emit(w);
            const double extra = rng.uniform();
            if (extra < 0.02) emit("https://t.co/" + lex.fillers[rng.below(cfg.filler_words)]);
            else if (extra < 0.04) emit("#" + lex.fillers[rng.below(cfg.filler_words)]);
        }
        rows.push_back({text, classes[c], Provenance::kOriginal, {}});
    }
    Rng order(derive_seed(cfg.seed, 2));
    order.shuffle(rows);
    return Dataset(std::move(rows), classes);
}

// ================================================================ classifiers

std::string_view arch_name(Arch arch) { return arch == Arch::kConvWindow ? "conv" : "boe"; }

std::optional<Arch> parse_arch(std::string_view name) {
    if (name == "boe") return Arch::kBagOfEmbeddings;
    if (name == "conv") return Arch::kConvWindow;
    return std::nullopt;
}

std::vector<std::size_t> Classifier::encode(const std::vector<std::string>& tokens) const {
    std::vector<std::size_t> ids;
    for (const auto& t : tokens) {
        auto it = words_.find(t);
        if (it != words_.end()) ids.push_back(it->second);
    }
    return ids;
}

namespace {

// Forward state of one example, kept for the backward pass.
struct ConvTrace {
    std::vector<double> features;
    std::vector<std::size_t> argmax;  // window start per filter
};

// Window row j of position t, or nullptr for padding. Sequences are padded
// with (width - 1) zero rows on both sides.
const double* window_row(const Matrix& emb, const std::vector<std::size_t>& ids, std::size_t t, std::size_t j,
                         std::size_t width) {
    const std::size_t p = t + j;
    if (p < width - 1 || p >= ids.size() + width - 1) return nullptr;
    return emb.row(ids[p - (width - 1)]).data();
}

void conv_features(const Matrix& emb, const Matrix& w, const Matrix& b, const std::vector<std::size_t>& ids,
                   std::size_t width, ConvTrace& tr) {
    const std::size_t f = w.rows, d = emb.cols;
    tr.features.assign(f, 0.0);
    tr.argmax.assign(f, static_cast<std::size_t>(-1));
    if (ids.empty()) return;
    const auto& kt = kn::active_table();
    const std::size_t windows = ids.size() + width - 1;
    for (std::size_t k = 0; k < f; ++k) {
        double best = 0.0;  // ReLU floor
        for (std::size_t t = 0; t < windows; ++t) {
            double a = b.data[k];
            for (std::size_t j = 0; j < width; ++j) {
                const double* x = window_row(emb, ids, t, j, width);
                if (x) a += kt.dot(w.row(k).data() + j * d, x, d);
            }
            if (a > best) {
                best = a;
                tr.argmax[k] = t;
            }
        }
        tr.features[k] = best;
    }
}

void mean_embedding(const Matrix& emb, const std::vector<std::size_t>& ids, std::vector<double>& h) {
    h.assign(emb.cols, 0.0);
    if (ids.empty()) return;
    const auto& kt = kn::active_table();
    for (auto id : ids) kt.axpy(1.0, emb.row(id).data(), h.data(), emb.cols);
    kt.scale(1.0 / static_cast<double>(ids.size()), h.data(), emb.cols);
}

void linear(const Matrix& w, const Matrix& b, const std::vector<double>& h, std::vector<double>& out) {
    const auto& kt = kn::active_table();
    out.resize(w.rows);
    for (std::size_t c = 0; c < w.rows; ++c) out[c] = b.data[c] + kt.dot(w.row(c).data(), h.data(), h.size());
}

void clamp_norm(double* row, std::size_t n, double max_norm) {
    if (max_norm <= 0.0) return;
    const auto& kt = kn::active_table();
    const double norm = std::sqrt(kt.dot(row, row, n));
    if (norm > max_norm) kt.scale(max_norm / norm, row, n);
}

void fill_normal(Matrix& m, Rng& rng, double std) {
    for (auto& x : m.data) x = std * rng.normal();
}

}  // namespace

void Classifier::scores(const std::vector<std::size_t>& ids, std::vector<double>& out) const {
    std::vector<double> h;
    if (arch_ == Arch::kBagOfEmbeddings) {
        mean_embedding(emb_, ids, h);
    } else {
        ConvTrace tr;
        conv_features(emb_, conv_w_, conv_b_, ids, cfg_.width, tr);
        h = std::move(tr.features);
    }
    linear(out_w_, out_b_, h, out);
}

std::size_t Classifier::predict(const std::vector<std::string>& tokens) const {
    std::vector<double> s;
    scores(encode(tokens), s);
    return static_cast<std::size_t>(std::max_element(s.begin(), s.end()) - s.begin());
}

std::vector<std::size_t> Classifier::predict(const Dataset& ds, const PreprocessConfig& cfg) const {
    std::vector<std::size_t> out;
    out.reserve(ds.size());
    for (const auto& ex : ds.examples()) {
        out.push_back(predict(preprocess(ex.text, cfg).value_or(std::vector<std::string>{})));
    }
    return out;
}

std::vector<double> Classifier::parameters() const {
    std::vector<double> out;
    for (const Matrix* m : {&emb_, &conv_w_, &conv_b_, &out_w_, &out_b_}) out.insert(out.end(), m->data.begin(), m->data.end());
    return out;
}

Classifier train_classifier(Arch arch, const Dataset& train, const PreprocessConfig& pcfg, std::uint64_t seed,
                            const ClassifierConfig& cfg) {
    std::size_t present = 0;
    for (auto n : train.class_counts()) present += n > 0 ? 1 : 0;
    if (present < 2) throw Error(ErrorCode::kDegenerateTrainSet, "training set has fewer than two classes");
    if (cfg.dim == 0 || cfg.epochs == 0 || cfg.width == 0 || (arch == Arch::kConvWindow && cfg.filters == 0)) {
        throw Error(ErrorCode::kInvalidArgument, "classifier dimensions must be positive");
    }
    Classifier m;
    m.arch_ = arch;
    m.cfg_ = cfg;
    m.classes_ = train.classes();
    std::vector<std::vector<std::string>> toks;
    std::vector<std::size_t> labels;
    for (const auto& ex : train.examples()) {
        toks.push_back(preprocess(ex.text, pcfg).value_or(std::vector<std::string>{}));
        labels.push_back(*train.class_index(ex.label));
        for (const auto& t : toks.back()) m.words_.emplace(t, m.words_.size());
    }
    // Word ids follow first appearance, so they depend only on the data.
    Rng rng(seed);
    const std::size_t d = cfg.dim, k = m.classes_.size();
    m.emb_ = Matrix(m.words_.size(), d);
    fill_normal(m.emb_, rng, 0.1);
    std::size_t features = d;
    if (arch == Arch::kConvWindow) {
        features = cfg.filters;
        m.conv_w_ = Matrix(cfg.filters, cfg.width * d);
        fill_normal(m.conv_w_, rng, 1.0 / std::sqrt(static_cast<double>(cfg.width * d)));
        m.conv_b_ = Matrix(1, cfg.filters);
    }
    m.out_w_ = Matrix(k, features);
    fill_normal(m.out_w_, rng, 0.1);
    m.out_b_ = Matrix(1, k);

    std::vector<std::vector<std::size_t>> ids;
    for (const auto& t : toks) ids.push_back(m.encode(t));
    std::vector<std::size_t> order(ids.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    const auto& kt = kn::active_table();
    std::vector<double> h, z, gz(k), gh(features);
    ConvTrace tr;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        const double lr = cfg.learning_rate / (1.0 + 0.5 * static_cast<double>(epoch) / static_cast<double>(cfg.epochs));
        for (std::size_t idx : order) {
            const auto& x = ids[idx];
            if (arch == Arch::kBagOfEmbeddings) {
                mean_embedding(m.emb_, x, h);
            } else {
                conv_features(m.emb_, m.conv_w_, m.conv_b_, x, cfg.width, tr);
                h = tr.features;
            }
            linear(m.out_w_, m.out_b_, h, z);
            const double mx = *std::max_element(z.begin(), z.end());
            double s = 0.0;
            for (std::size_t c = 0; c < k; ++c) s += (gz[c] = std::exp(z[c] - mx));
            for (std::size_t c = 0; c < k; ++c) gz[c] = gz[c] / s - (c == labels[idx] ? 1.0 : 0.0);
            std::fill(gh.begin(), gh.end(), 0.0);
            for (std::size_t c = 0; c < k; ++c) {
                kt.axpy(gz[c], m.out_w_.row(c).data(), gh.data(), features);
                kt.axpy(-lr * gz[c], h.data(), m.out_w_.row(c).data(), features);
                m.out_b_.data[c] -= lr * gz[c];
                clamp_norm(m.out_w_.row(c).data(), features, cfg.max_norm);
            }
            if (x.empty()) continue;
            if (arch == Arch::kBagOfEmbeddings) {
                const double scale = -lr / static_cast<double>(x.size());
                for (auto id : x) kt.axpy(scale, gh.data(), m.emb_.row(id).data(), d);
            } else {
                for (std::size_t f = 0; f < cfg.filters; ++f) {
                    if (tr.argmax[f] == static_cast<std::size_t>(-1) || gh[f] == 0.0) continue;
                    const double g = gh[f];
                    const std::size_t t = tr.argmax[f];
                    for (std::size_t j = 0; j < cfg.width; ++j) {
                        const std::size_t p = t + j;
                        if (p < cfg.width - 1 || p >= x.size() + cfg.width - 1) continue;
                        double* e = m.emb_.row(x[p - (cfg.width - 1)]).data();
                        double* w = m.conv_w_.row(f).data() + j * d;
                        // Embedding update uses the filter before its own update.
                        kt.axpy(-lr * g, w, e, d);
                        kt.axpy(-lr * g, e, w, d);
                    }
                    m.conv_b_.data[f] -= lr * g;
                    clamp_norm(m.conv_w_.row(f).data(), cfg.width * d, cfg.max_norm);
                }
            }
        }
    }
    return m;
}

double macro_f1(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& pred, std::size_t k) {
    if (truth.size() != pred.size()) throw Error(ErrorCode::kInvalidArgument, "label/prediction length mismatch");
    if (truth.empty()) throw Error(ErrorCode::kEmptyDataset, "macro_f1 on an empty test set");
    std::vector<std::size_t> tp(k, 0), fp(k, 0), fn(k, 0);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == pred[i]) {
            ++tp[truth[i]];
        } else {
            ++fp[pred[i]];
            ++fn[truth[i]];
        }
    }
    double total = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        const double denom = static_cast<double>(2 * tp[c] + fp[c] + fn[c]);
        total += denom > 0.0 ? 2.0 * static_cast<double>(tp[c]) / denom : 0.0;
    }
    return total / static_cast<double>(k);
}

std::vector<std::size_t> label_indices(const Dataset& ds) {
    std::vector<std::size_t> out;
    out.reserve(ds.size());
    for (const auto& ex : ds.examples()) out.push_back(*ds.class_index(ex.label));
    return out;
}

double macro_f1(const Classifier& model, const Dataset& test, const PreprocessConfig& cfg) {
    if (model.classes() != test.classes()) throw Error(ErrorCode::kInvalidArgument, "classifier/test class mismatch");
    return macro_f1(label_indices(test), model.predict(test, cfg), test.num_classes());
}

// ================================================================ statistics

double mean(const std::vector<double>& xs) {
    if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double stddev(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

PairedTest paired_t_test(const std::vector<double>& before, const std::vector<double>& after) {
    if (before.size() != after.size() || before.size() < 2) {
        throw Error(ErrorCode::kInvalidArgument, "paired test needs two equally sized samples of size >= 2");
    }
    std::vector<double> d;
    for (std::size_t i = 0; i < before.size(); ++i) d.push_back(after[i] - before[i]);
    PairedTest out;
    out.mean_diff = mean(d);
    const double se = stddev(d) / std::sqrt(static_cast<double>(d.size()));
    if (se == 0.0) {
        out.t = out.mean_diff > 0 ? std::numeric_limits<double>::infinity()
                                  : (out.mean_diff < 0 ? -std::numeric_limits<double>::infinity() : 0.0);
        out.p_value = out.mean_diff > 0 ? 0.0 : 1.0;
        return out;
    }
    out.t = out.mean_diff / se;
    boost::math::students_t dist(static_cast<double>(d.size() - 1));
    out.p_value = boost::math::cdf(boost::math::complement(dist, out.t));
    return out;
}

// ================================================================ experiments

namespace {

std::string join_reals(const std::vector<double>& xs) {
    std::string s;
    for (double x : xs) s += (s.empty() ? "" : ",") + format_real(x);
    return s;
}

}  // namespace

void ExperimentConfig::read(ConfigReader& r, const std::string& p) {
    test_fraction = r.real(p + "test_fraction", test_fraction);
    seed = r.u64(p + "seed", seed);
    fractions = r.reals(p + "fractions", fractions);
    repeats = r.count(p + "repeats", repeats);
    const std::string arch_list = r.text(p + "archs", "");
    if (!arch_list.empty()) {
        archs.clear();
        std::size_t pos = 0;
        while (pos <= arch_list.size()) {
            const auto comma = arch_list.find(',', pos);
            const std::string item = arch_list.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            if (auto a = parse_arch(item)) archs.push_back(*a);
            else r.error(p + "archs: unknown architecture '" + item + "' (expected boe or conv)");
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
    }
    run_unboosted = r.flag(p + "run_unboosted", run_unboosted);
    run_databoost = r.flag(p + "run_databoost", run_databoost);
    run_naive = r.flag(p + "run_naive", run_naive);
    naive_probability = r.real(p + "naive_probability", naive_probability);
    lexicon_size = r.count(p + "lexicon_size", lexicon_size);
    lexicon_min_count = r.count(p + "lexicon_min_count", lexicon_min_count);
    max_attempts = r.count(p + "max_attempts", max_attempts);
    classifier.dim = r.count(p + "clf.dim", classifier.dim);
    classifier.filters = r.count(p + "clf.filters", classifier.filters);
    classifier.width = r.count(p + "clf.width", classifier.width);
    classifier.epochs = r.count(p + "clf.epochs", classifier.epochs);
    classifier.learning_rate = r.real(p + "clf.learning_rate", classifier.learning_rate);
    classifier.max_norm = r.real(p + "clf.max_norm", classifier.max_norm);
    ngram_order = r.count(p + "ngram_order", ngram_order);
    const auto flat = r.reals(p + "ratios", {});
    if (!flat.empty()) {
        if (flat.size() % 2 != 0) {
            r.error(p + "ratios: expected original,boosted pairs");
        } else {
            ratios.clear();
            for (std::size_t i = 0; i < flat.size(); i += 2) ratios.emplace_back(flat[i], flat[i + 1]);
        }
    }
    guide.read(r);
}

void ExperimentConfig::write(KeyValues& kv, const std::string& p) const {
    kv[p + "test_fraction"] = format_real(test_fraction);
    kv[p + "seed"] = std::to_string(seed);
    kv[p + "fractions"] = join_reals(fractions);
    kv[p + "repeats"] = std::to_string(repeats);
    std::string a;
    for (auto arch : archs) a += (a.empty() ? "" : ",") + std::string(arch_name(arch));
    kv[p + "archs"] = a;
    kv[p + "run_unboosted"] = run_unboosted ? "true" : "false";
    kv[p + "run_databoost"] = run_databoost ? "true" : "false";
    kv[p + "run_naive"] = run_naive ? "true" : "false";
    kv[p + "naive_probability"] = format_real(naive_probability);
    kv[p + "lexicon_size"] = std::to_string(lexicon_size);
    kv[p + "lexicon_min_count"] = std::to_string(lexicon_min_count);
    kv[p + "max_attempts"] = std::to_string(max_attempts);
    kv[p + "clf.dim"] = std::to_string(classifier.dim);
    kv[p + "clf.filters"] = std::to_string(classifier.filters);
    kv[p + "clf.width"] = std::to_string(classifier.width);
    kv[p + "clf.epochs"] = std::to_string(classifier.epochs);
    kv[p + "clf.learning_rate"] = format_real(classifier.learning_rate);
    kv[p + "clf.max_norm"] = format_real(classifier.max_norm);
    kv[p + "ngram_order"] = std::to_string(ngram_order);
    std::vector<double> flat;
    for (auto [o, b] : ratios) {
        flat.push_back(o);
        flat.push_back(b);
    }
    kv[p + "ratios"] = join_reals(flat);
    guide.write(kv);
}

void ExperimentConfig::validate() const {
    std::vector<std::string> bad;
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) bad.push_back("test_fraction must be in (0, 1)");
    for (double f : fractions) {
        if (!(f > 0.0 && f <= 1.0 - test_fraction + 1e-12)) {
            bad.push_back("fraction " + format_real(f) + " must be in (0, 1 - test_fraction]");
        }
    }
    if (repeats < 1) bad.push_back("repeats must be >= 1");
    if (archs.empty()) bad.push_back("at least one architecture is required");
    if (lexicon_size < 1) bad.push_back("lexicon_size must be >= 1");
    if (max_attempts < 1) bad.push_back("max_attempts must be >= 1");
    if (ngram_order < 1 || ngram_order > 5) bad.push_back("ngram_order must be in 1..5");
    if (!(naive_probability >= 0.0 && naive_probability <= 1.0)) bad.push_back("naive_probability must be in [0, 1]");
    for (auto [o, b] : ratios) {
        if (o < 0 || b < 0 || std::abs(o + b - 100.0) > 1e-9 || o <= 0) {
            bad.push_back("ratio " + format_real(o) + "/" + format_real(b) + " must sum to 100 with original > 0");
        }
    }
    try {
        guide.validate();
    } catch (const Error& e) {
        bad.push_back(e.what());
    }
    if (bad.empty()) return;
    std::string msg;
    for (const auto& b : bad) msg += (msg.empty() ? "" : "; ") + b;
    throw Error(ErrorCode::kConfig, msg);
}

std::string version_string() { return std::string("databoost ") + DATABOOST_VERSION; }

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

std::string fmt(double v, int prec = 6) {
    if (std::isnan(v)) return "NA";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
    return buf;
}

std::string hex64(std::uint64_t v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string ratio_label(std::pair<double, double> r) { return format_real(r.first) + "/" + format_real(r.second); }

std::uint64_t classifier_seed(std::uint64_t seed, std::size_t repeat, std::size_t arch_index) {
    return derive_seed(derive_seed(seed, 2000 + repeat), arch_index);
}

Dataset subset_of_train(const Dataset& train, double fraction_of_train, std::uint64_t seed) {
    if (fraction_of_train >= 1.0 - 1e-12) return train;
    return starve(train, fraction_of_train, seed);
}

ExperimentReport new_report(const ExperimentConfig& cfg, const Dataset& test) {
    ExperimentReport report;
    cfg.write(report.config);
    report.version = version_string();
    report.test_hash = hex64(fnv1a(to_jsonl(test)));
    return report;
}

void require_generator(const GeneratorModel& gen) {
    if (!gen.model || !gen.vocab) throw Error(ErrorCode::kInvalidArgument, "boosting requires a language model");
}

}  // namespace

std::pair<Dataset, Dataset> experiment_split(const Dataset& ds, const ExperimentConfig& cfg) {
    return split_stratified(ds, cfg.test_fraction, cfg.seed);
}

ExperimentReport starvation_experiment(const Dataset& ds, const ExperimentConfig& cfg, const PreprocessConfig& pcfg,
                                       const GeneratorModel& gen) {
    cfg.validate();
    if (cfg.run_databoost) require_generator(gen);
    const auto [train, test] = experiment_split(ds, cfg);
    ExperimentReport report = new_report(cfg, test);
    const auto dist = class_distribution(train);
    for (double fraction : cfg.fractions) {
        const double of_train = std::min(1.0, fraction / (1.0 - cfg.test_fraction));
        for (std::size_t r = 0; r < cfg.repeats; ++r) {
            const std::uint64_t seed_r = derive_seed(cfg.seed, 1000 + r);
            const Dataset starved = subset_of_train(train, of_train, seed_r);
            struct Condition {
                std::string method;
                Dataset data;
                bool partial = false;
            };
            std::vector<Condition> conditions;
            if (cfg.run_unboosted) conditions.push_back({"none", starved});
            if (cfg.run_databoost || cfg.run_naive) {
                BoostPlan plan = plan_boost(starved, train.size(), dist);
                plan.guide = cfg.guide;
                plan.max_attempts = cfg.max_attempts;
                plan.seed = derive_seed(seed_r, 1);
                if (cfg.run_databoost) {
                    const Lexicon lexicon =
                        build_lexicon(count_tokens(starved, pcfg), cfg.lexicon_size, cfg.lexicon_min_count, gen.vocab);
                    BoostOptions opts;
                    opts.jobs = cfg.jobs;
                    BoostResult res = boost(starved, plan, *gen.model, *gen.vocab, lexicon, opts);
                    for (const auto& w : res.warnings) std::fprintf(stderr, "boost: %s\n", w.c_str());
                    report.boosted_sets.push_back(res.data);
                    conditions.push_back({"databoost", std::move(res.data), res.partial});
                }
                if (cfg.run_naive) {
                    conditions.push_back({"naive",
                                          naive_baseline_augment(starved, plan, pcfg, cfg.naive_probability,
                                                                 cfg.naive_probability, derive_seed(seed_r, 2)),
                                          false});
                }
            }
            for (std::size_t a = 0; a < cfg.archs.size(); ++a) {
                for (const auto& cond : conditions) {
                    const std::uint64_t cs = classifier_seed(cfg.seed, r, a);
                    const Classifier clf = train_classifier(cfg.archs[a], cond.data, pcfg, cs, cfg.classifier);
                    ReportRow row;
                    row.experiment = "starve";
                    row.arch = arch_name(cfg.archs[a]);
                    row.method = cond.method;
                    row.fraction = fraction;
                    row.repeat = r;
                    row.seed = cs;
                    row.train_size = cond.data.size();
                    row.f1 = macro_f1(clf, test, pcfg);
                    row.partial = cond.partial;
                    report.rows.push_back(row);
                }
            }
        }
    }
    return report;
}

ExperimentReport ratio_experiment(const Dataset& ds, const ExperimentConfig& cfg, const PreprocessConfig& pcfg,
                                  const GeneratorModel& gen) {
    cfg.validate();
    const auto [train, test] = experiment_split(ds, cfg);
    ExperimentReport report = new_report(cfg, test);
    const auto dist = class_distribution(train);
    const NgramLm ngram = train_ngram(train, pcfg, cfg.ngram_order);
    const double original_ppl = ngram_perplexity(ngram, test, pcfg);
    bool needs_boost = false;
    for (auto [o, b] : cfg.ratios) needs_boost |= b > 0;
    if (needs_boost) require_generator(gen);
    Lexicon lexicon;
    if (needs_boost) {
        lexicon = build_lexicon(count_tokens(train, pcfg), cfg.lexicon_size, cfg.lexicon_min_count, gen.vocab);
    }
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
        const std::uint64_t seed_r = derive_seed(cfg.seed, 1000 + r);
        struct Mix {
            Dataset originals;
            BoostPlan plan;
        };
        std::vector<Mix> mixes;
        std::vector<std::size_t> pool_targets(train.num_classes(), 0);
        for (auto ratio : cfg.ratios) {
            Mix m{subset_of_train(train, ratio.first / 100.0, seed_r), {}};
            m.plan = plan_boost(m.originals, train.size(), dist);
            for (std::size_t c = 0; c < pool_targets.size(); ++c) {
                pool_targets[c] = std::max(pool_targets[c], m.plan.targets[c]);
            }
            mixes.push_back(std::move(m));
        }
        // One generated pool per repeat; each ratio takes a per-class prefix.
        std::vector<std::vector<LabeledExample>> pool(train.num_classes());
        bool partial = false;
        if (needs_boost) {
            BoostPlan pp;
            pp.classes = train.classes();
            pp.targets = pool_targets;
            pp.guide = cfg.guide;
            pp.max_attempts = cfg.max_attempts;
            pp.seed = derive_seed(seed_r, 3);
            BoostOptions opts;
            opts.jobs = cfg.jobs;
            BoostResult res = boost(train.with_examples({}), pp, *gen.model, *gen.vocab, lexicon, opts);
            partial = res.partial;
            for (const auto& w : res.warnings) std::fprintf(stderr, "boost: %s\n", w.c_str());
            for (const auto& ex : res.data.examples()) pool[*train.class_index(ex.label)].push_back(ex);
        }
        for (std::size_t i = 0; i < cfg.ratios.size(); ++i) {
            std::vector<LabeledExample> rows = mixes[i].originals.examples();
            std::vector<std::vector<std::string>> boosted_tokens;
            for (std::size_t c = 0; c < pool.size(); ++c) {
                const std::size_t take = std::min(mixes[i].plan.targets[c], pool[c].size());
                for (std::size_t j = 0; j < take; ++j) {
                    rows.push_back(pool[c][j]);
                    if (auto t = preprocess(pool[c][j].text, pcfg)) boosted_tokens.push_back(*t);
                }
            }
            const Dataset mixed = train.with_examples(std::move(rows));
            if (cfg.ratios[i].second > 0) report.boosted_sets.push_back(mixed);
            const double ppl_boosted =
                boosted_tokens.empty() ? original_ppl : ngram_perplexity(ngram, boosted_tokens);
            const double ppl_mixed = ngram_perplexity(ngram, mixed, pcfg);
            for (std::size_t a = 0; a < cfg.archs.size(); ++a) {
                const std::uint64_t cs = classifier_seed(cfg.seed, r, a);
                const Classifier clf = train_classifier(cfg.archs[a], mixed, pcfg, cs, cfg.classifier);
                ReportRow row;
                row.experiment = "ratio";
                row.arch = arch_name(cfg.archs[a]);
                row.method = cfg.ratios[i].second > 0 ? "databoost" : "none";
                row.fraction = 1.0 - cfg.test_fraction;
                row.ratio = ratio_label(cfg.ratios[i]);
                row.repeat = r;
                row.seed = cs;
                row.train_size = mixed.size();
                row.f1 = macro_f1(clf, test, pcfg);
                row.ppl_boosted = ppl_boosted;
                row.ppl_mixed = ppl_mixed;
                row.partial = partial && cfg.ratios[i].second > 0;
                report.rows.push_back(row);
            }
        }
    }
    return report;
}

std::string ExperimentReport::to_tsv() const {
    std::string out = "# version=" + version + "\n# test_hash=" + test_hash + "\n";
    for (const auto& [k, v] : config) out += "# " + k + "=" + v + "\n";
    out += "experiment\tarch\tmethod\tfraction\tratio\trepeat\tseed\ttrain_size\tf1\tppl_boosted\tppl_mixed\tpartial\n";
    for (const auto& r : rows) {
        out += r.experiment + "\t" + r.arch + "\t" + r.method + "\t" + format_real(r.fraction) + "\t" +
               (r.ratio.empty() ? "-" : r.ratio) + "\t" + std::to_string(r.repeat) + "\t" + std::to_string(r.seed) +
               "\t" + std::to_string(r.train_size) + "\t" + fmt(r.f1) + "\t" + fmt(r.ppl_boosted, 4) + "\t" +
               fmt(r.ppl_mixed, 4) + "\t" + (r.partial ? "1" : "0") + "\n";
    }
    return out;
}

std::string ExperimentReport::summary() const {
    struct Group {
        std::string key;
        std::vector<double> f1, ppl;
    };
    std::vector<Group> groups;
    for (const auto& r : rows) {
        const std::string key = r.experiment + "  " + r.arch + "  " + r.method + "  " + format_real(r.fraction) +
                                (r.ratio.empty() ? "" : "  " + r.ratio);
        auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) { return g.key == key; });
        if (it == groups.end()) {
            groups.push_back({key, {}, {}});
            it = groups.end() - 1;
        }
        it->f1.push_back(r.f1);
        if (!std::isnan(r.ppl_boosted)) it->ppl.push_back(r.ppl_boosted);
    }
    std::size_t width = 9;
    for (const auto& g : groups) width = std::max(width, g.key.size());
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-*s  %3s  %8s  %8s  %9s\n", static_cast<int>(width), "condition", "n", "f1_mean",
                  "f1_sd", "ppl_mean");
    out += buf;
    for (const auto& g : groups) {
        std::snprintf(buf, sizeof(buf), "%-*s  %3zu  %8.4f  %8.4f  %9s\n", static_cast<int>(width), g.key.c_str(),
                      g.f1.size(), mean(g.f1), stddev(g.f1), g.ppl.empty() ? "-" : fmt(mean(g.ppl), 2).c_str());
        out += buf;
    }
    return out;
}

std::vector<double> ExperimentReport::f1_values(std::string_view arch, std::string_view method, double fraction) const {
    std::vector<double> out;
    for (const auto& r : rows) {
        if (r.experiment == "starve" && r.arch == arch && r.method == method && std::abs(r.fraction - fraction) < 1e-12) {
            out.push_back(r.f1);
        }
    }
    return out;
}

std::vector<double> ExperimentReport::f1_values_ratio(std::string_view arch, std::string_view ratio) const {
    std::vector<double> out;
    for (const auto& r : rows) {
        if (r.experiment == "ratio" && r.arch == arch && r.ratio == ratio) out.push_back(r.f1);
    }
    return out;
}

}  // namespace databoost
