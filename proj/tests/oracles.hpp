// Copyright 2026 The databoost Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Independent reference implementations shared by the unit tests and the
// acceptance binary. They deliberately avoid the library's own helpers.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "databoost/random.hpp"

namespace oracle {

struct ScoredWord {
    std::string word;
    double score;
};

// Direct salience ranking from raw (class index, tokens) documents: counts
// are tallied here, ties are resolved with exact integer arithmetic.
inline std::vector<std::vector<ScoredWord>> salience_lexicon(
    const std::vector<std::pair<std::size_t, std::vector<std::string>>>& docs, std::size_t num_classes,
    std::size_t top_n, std::size_t min_count) {
    std::map<std::string, std::vector<long long>> counts;
    std::vector<long long> class_total(num_classes, 0);
    for (const auto& [c, toks] : docs) {
        for (const auto& t : toks) {
            auto& v = counts[t];
            v.resize(num_classes, 0);
            ++v[c];
            ++class_total[c];
        }
    }
    std::vector<std::vector<ScoredWord>> out(num_classes);
    for (std::size_t c = 0; c < num_classes; ++c) {
        struct Row {
            std::string w;
            long long n, total;
        };
        std::vector<Row> rows;
        for (const auto& [w, v] : counts) {
            long long total = 0;
            for (long long x : v) total += x;
            if (v[c] >= static_cast<long long>(std::max<std::size_t>(min_count, 1))) rows.push_back({w, v[c], total});
        }
        // Bubble-style selection keeps this visibly different from a library sort.
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (std::size_t j = i + 1; j < rows.size(); ++j) {
                const __int128 lhs = static_cast<__int128>(rows[j].n) * rows[j].n * rows[i].total;
                const __int128 rhs = static_cast<__int128>(rows[i].n) * rows[i].n * rows[j].total;
                bool better = lhs > rhs;
                if (lhs == rhs) better = rows[j].n > rows[i].n || (rows[j].n == rows[i].n && rows[j].w < rows[i].w);
                if (better) std::swap(rows[i], rows[j]);
            }
        }
        for (std::size_t i = 0; i < rows.size() && i < top_n; ++i) {
            const double score = static_cast<double>(rows[i].n) /
                                 std::sqrt(static_cast<double>(rows[i].total) * static_cast<double>(class_total[c]));
            out[c].push_back({rows[i].w, score});
        }
    }
    return out;
}

// Random small corpus: documents as (class, tokens) with tokens drawn from a
// small alphabet with class-biased frequencies.
inline std::vector<std::pair<std::size_t, std::vector<std::string>>> random_corpus(databoost::Rng& rng,
                                                                                  std::size_t num_classes,
                                                                                  std::size_t max_tokens) {
    std::vector<std::pair<std::size_t, std::vector<std::string>>> docs;
    const std::size_t vocab = 5 + rng.below(30);
    std::size_t used = 0;
    // Every class gets at least one document with at least one token.
    for (std::size_t c = 0; used < max_tokens; c = (c + 1) % num_classes) {
        const std::size_t len = 1 + rng.below(8);
        if (used + len > max_tokens && docs.size() >= num_classes) break;
        std::vector<std::string> toks;
        for (std::size_t i = 0; i < len; ++i) {
            std::size_t w = rng.below(vocab);
            if (rng.uniform() < 0.5) w = (w % 3) + 3 * c;  // class-flavoured words
            toks.push_back("w" + std::to_string(w));
        }
        used += len;
        docs.emplace_back(c, std::move(toks));
        if (used >= max_tokens) break;
    }
    return docs;
}

// Closed-form KL(p || q) with the same floor convention as the library.
inline double kl(const std::vector<double>& p, const std::vector<double>& q, double floor = 1e-12) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) s += p[i] * std::log(p[i] / std::max(q[i], floor));
    }
    return s;
}

inline std::vector<double> softmax(const std::vector<double>& z, double t) {
    double m = z[0];
    for (double x : z) m = std::max(m, x);
    std::vector<double> p(z.size());
    double s = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        p[i] = std::exp((z[i] - m) / t);
        s += p[i];
    }
    for (double& x : p) x /= s;
    return p;
}

// Sum over lexicon rows of log(eps + (1 + cos(e_hat, lex_row)) / 2) where
// e_hat = sum_v p[v] * emb[v]. Embeddings are plain nested vectors.
inline double salience_gain(const std::vector<double>& p, const std::vector<std::vector<double>>& emb,
                            const std::vector<std::vector<double>>& lex, double eps) {
    const std::size_t d = emb[0].size();
    std::vector<double> e(d, 0.0);
    for (std::size_t v = 0; v < p.size(); ++v)
        for (std::size_t j = 0; j < d; ++j) e[j] += p[v] * emb[v][j];
    double g = 0.0;
    for (const auto& w : lex) {
        double dot = 0.0, ne = 0.0, nw = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            dot += e[j] * w[j];
            ne += e[j] * e[j];
            nw += w[j] * w[j];
        }
        const double cosv = dot / std::sqrt(ne * nw);
        g += std::log(eps + (1.0 + cosv) / 2.0);
    }
    return g;
}

// Macro-F1 straight from the confusion matrix definition.
inline double macro_f1(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& pred, std::size_t k) {
    std::vector<std::vector<double>> cm(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < truth.size(); ++i) cm[truth[i]][pred[i]] += 1.0;
    double total = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        double tp = cm[c][c], row = 0.0, col = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            row += cm[c][j];
            col += cm[j][c];
        }
        const double prec = col > 0 ? tp / col : 0.0;
        const double rec = row > 0 ? tp / row : 0.0;
        total += (prec + rec) > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
    }
    return total / static_cast<double>(k);
}

// The beta controller written as an explicit branch table.
inline double beta_next(double beta, double kl_value, double sigma) {
    if (kl_value >= 2.0 * sigma) return beta * 2.0;
    if (kl_value <= sigma / 2.0) return beta / 2.0;
    return beta;
}

}  // namespace oracle
