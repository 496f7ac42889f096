// Copyright 2026 The databoost Authors
// SPDX-License-Identifier: Apache-2.0

#include "databoost/ngram.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "databoost/error.hpp"

namespace databoost {

namespace {

double discount_from_counts(const std::map<std::vector<std::int32_t>, std::size_t>& counts) {
    std::size_t n1 = 0, n2 = 0;
    for (const auto& [k, c] : counts) {
        if (c == 1) ++n1;
        else if (c == 2) ++n2;
    }
    if (n1 == 0 || n2 == 0) return 0.5;
    return std::clamp(static_cast<double>(n1) / static_cast<double>(n1 + 2 * n2), 0.05, 0.95);
}

std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream in{std::string(s)};
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

}  // namespace

std::int32_t NgramLm::word_id(std::string_view w) const {
    auto it = ids_.find(std::string(w));
    if (it != ids_.end()) return it->second;
    return ids_.at(std::string(kUnk));
}

const std::string& NgramLm::token_name(std::int32_t id) const {
    static const std::string bos(kBos);
    return id == bos_id_ ? bos : words_.at(static_cast<std::size_t>(id));
}

double NgramLm::prob_ids(std::span<const std::int32_t> context, std::int32_t word) const {
    // Use at most order-1 trailing context tokens.
    if (context.size() + 1 > order_) context = context.subspan(context.size() + 1 - order_);
    const std::size_t k = context.size() + 1;
    Key key(context.begin(), context.end());
    key.push_back(word);
    const auto& pk = probs_[k - 1];
    if (auto it = pk.find(key); it != pk.end()) return it->second;
    double gamma = 1.0;
    key.pop_back();
    if (auto it = backoff_[k - 1].find(key); it != backoff_[k - 1].end()) gamma = it->second;
    if (k == 1) return gamma / static_cast<double>(words_.size());
    return gamma * prob_ids(context.subspan(1), word);
}

double NgramLm::prob(std::span<const std::string> history, std::string_view word) const {
    std::vector<std::int32_t> ctx;
    for (const auto& h : history) ctx.push_back(h == kBos ? bos_id_ : word_id(h));
    return prob_ids(ctx, word_id(word));
}

NgramLm train_ngram(const std::vector<std::vector<std::string>>& sentences, std::size_t order, bool include_eos) {
    if (order < 1 || order > 5) throw Error(ErrorCode::kInvalidArgument, "n-gram order must be in 1..5");
    if (sentences.empty()) throw Error(ErrorCode::kEmptyCorpus, "no sentences");
    NgramLm lm;
    lm.order_ = order;
    std::set<std::string> types;
    std::size_t total_tokens = 0;
    for (const auto& s : sentences) {
        for (const auto& w : s) {
            types.insert(w);
            ++total_tokens;
        }
    }
    if (total_tokens == 0) throw Error(ErrorCode::kEmptyCorpus, "no tokens");
    types.erase(std::string(NgramLm::kBos));
    types.erase(std::string(NgramLm::kEos));
    types.erase(std::string(NgramLm::kUnk));
    lm.words_.assign(types.begin(), types.end());
    lm.words_.emplace_back(NgramLm::kEos);
    lm.words_.emplace_back(NgramLm::kUnk);
    for (std::size_t i = 0; i < lm.words_.size(); ++i) lm.ids_[lm.words_[i]] = static_cast<std::int32_t>(i);
    lm.bos_id_ = static_cast<std::int32_t>(lm.words_.size());

    using Key = NgramLm::Key;
    // Raw counts per order; grams never predict <s>.
    std::vector<std::map<Key, std::size_t>> raw(order);
    for (const auto& s : sentences) {
        std::vector<std::int32_t> ids{lm.bos_id_};
        for (const auto& w : s) ids.push_back(lm.word_id(w));
        if (include_eos) ids.push_back(lm.word_id(NgramLm::kEos));
        for (std::size_t end = 1; end < ids.size(); ++end) {
            for (std::size_t k = 1; k <= order && k <= end + 1; ++k) {
                raw[k - 1][Key(ids.begin() + static_cast<std::ptrdiff_t>(end + 1 - k),
                               ids.begin() + static_cast<std::ptrdiff_t>(end + 1))]++;
            }
        }
    }
    // Effective counts: raw at the top order, continuation counts below,
    // except for grams anchored at <s> which cannot be extended left.
    std::vector<std::map<Key, std::size_t>> eff(order);
    eff[order - 1] = raw[order - 1];
    for (std::size_t k = order - 1; k >= 1; --k) {
        for (const auto& [g, c] : raw[k - 1]) {
            if (g.front() == lm.bos_id_) eff[k - 1][g] = c;
        }
        for (const auto& [g, c] : raw[k]) {
            if (g.front() == lm.bos_id_ && g.size() == 1) continue;
            Key tail(g.begin() + 1, g.end());
            if (tail.front() == lm.bos_id_) continue;
            eff[k - 1][tail] += 1;
        }
    }

    lm.probs_.resize(order);
    lm.backoff_.resize(order);
    for (std::size_t k = 1; k <= order; ++k) {
        const double D = discount_from_counts(eff[k - 1]);
        std::map<Key, std::pair<std::size_t, std::size_t>> ctx;  // context -> (total, distinct)
        for (const auto& [g, c] : eff[k - 1]) {
            auto& e = ctx[Key(g.begin(), g.end() - 1)];
            e.first += c;
            e.second += 1;
        }
        for (const auto& [h, e] : ctx) {
            lm.backoff_[k - 1][h] = D * static_cast<double>(e.second) / static_cast<double>(e.first);
        }
        for (const auto& [g, c] : eff[k - 1]) {
            const Key h(g.begin(), g.end() - 1);
            const auto& e = ctx.at(h);
            const double lower = k == 1 ? 1.0 / static_cast<double>(lm.words_.size())
                                        : lm.prob_ids(std::span<const std::int32_t>(h).subspan(1), g.back());
            lm.probs_[k - 1][g] = std::max(static_cast<double>(c) - D, 0.0) / static_cast<double>(e.first) +
                                  lm.backoff_[k - 1].at(h) * lower;
        }
    }
    return lm;
}

std::vector<std::vector<std::string>> tokenize_dataset(const Dataset& ds, const PreprocessConfig& cfg) {
    std::vector<std::vector<std::string>> out;
    for (const auto& ex : ds.examples()) {
        if (auto t = preprocess(ex.text, cfg)) out.push_back(std::move(*t));
    }
    return out;
}

NgramLm train_ngram(const Dataset& train, const PreprocessConfig& cfg, std::size_t order) {
    return train_ngram(tokenize_dataset(train, cfg), order);
}

double ngram_perplexity(const NgramLm& lm, const std::vector<std::vector<std::string>>& sentences, bool include_eos) {
    double nll = 0.0;
    std::size_t n = 0;
    for (const auto& s : sentences) {
        std::vector<std::int32_t> ctx{lm.bos_id()};
        auto score = [&](std::int32_t w) {
            const double p = lm.prob_ids(ctx, w);
            nll -= std::log(p);
            ++n;
            ctx.push_back(w);
        };
        for (const auto& w : s) score(lm.word_id(w));
        if (include_eos) score(lm.word_id(NgramLm::kEos));
    }
    if (n == 0) throw Error(ErrorCode::kEmptyCorpus, "no tokens to score");
    return std::exp(nll / static_cast<double>(n));
}

double ngram_perplexity(const NgramLm& lm, const Dataset& ds, const PreprocessConfig& cfg) {
    return ngram_perplexity(lm, tokenize_dataset(ds, cfg));
}

// Text format:
//   #ngram order=<n>
//   one "\vocab<TAB>word" row per predicted word in id order
//   "<k><TAB><context or -><TAB><token><TAB><log p>" rows per order, sorted
//   "<k><TAB><context or -><TAB><backoff><TAB><log gamma>" rows
std::string NgramLm::to_text() const {
    std::string out = "#ngram order=" + std::to_string(order_) + "\n";
    for (const auto& w : words_) out += "\\vocab\t" + w + "\n";
    char buf[64];
    auto ctx_str = [&](const Key& k, std::size_t len) {
        if (len == 0) return std::string("-");
        std::string s;
        for (std::size_t i = 0; i < len; ++i) {
            if (i) s.push_back(' ');
            s += token_name(k[i]);
        }
        return s;
    };
    std::vector<std::string> rows;
    for (std::size_t k = 1; k <= order_; ++k) {
        rows.clear();
        for (const auto& [g, p] : probs_[k - 1]) {
            std::snprintf(buf, sizeof(buf), "%.17g", std::log(p));
            rows.push_back(std::to_string(k) + "\t" + ctx_str(g, k - 1) + "\t" + token_name(g.back()) + "\t" + buf);
        }
        for (const auto& [h, gamma] : backoff_[k - 1]) {
            std::snprintf(buf, sizeof(buf), "%.17g", std::log(gamma));
            rows.push_back(std::to_string(k) + "\t" + ctx_str(h, k - 1) + "\t<backoff>\t" + buf);
        }
        std::sort(rows.begin(), rows.end());
        for (const auto& r : rows) out += r + "\n";
    }
    return out;
}

NgramLm NgramLm::from_text(std::string_view text) {
    NgramLm lm;
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || !line.starts_with("#ngram order=")) {
        throw Error(ErrorCode::kMalformedRow, "n-gram file: missing header");
    }
    lm.order_ = std::stoul(line.substr(13));
    if (lm.order_ < 1 || lm.order_ > 5) throw Error(ErrorCode::kMalformedRow, "n-gram file: bad order");
    lm.probs_.resize(lm.order_);
    lm.backoff_.resize(lm.order_);
    std::size_t line_no = 1;
    bool vocab_done = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::size_t pos = 0;
        while (true) {
            const auto tab = line.find('\t', pos);
            cols.push_back(line.substr(pos, tab - pos));
            if (tab == std::string::npos) break;
            pos = tab + 1;
        }
        if (cols[0] == "\\vocab") {
            if (vocab_done || cols.size() != 2) throw Error(ErrorCode::kMalformedRow, "n-gram line " + std::to_string(line_no));
            lm.ids_[cols[1]] = static_cast<std::int32_t>(lm.words_.size());
            lm.words_.push_back(cols[1]);
            continue;
        }
        if (!vocab_done) {
            vocab_done = true;
            lm.bos_id_ = static_cast<std::int32_t>(lm.words_.size());
            if (!lm.ids_.count(std::string(kUnk)) || !lm.ids_.count(std::string(kEos))) {
                throw Error(ErrorCode::kMalformedRow, "n-gram file: vocabulary lacks </s> or <unk>");
            }
        }
        if (cols.size() != 4) throw Error(ErrorCode::kMalformedRow, "n-gram line " + std::to_string(line_no));
        const std::size_t k = std::stoul(cols[0]);
        if (k < 1 || k > lm.order_) throw Error(ErrorCode::kMalformedRow, "n-gram line " + std::to_string(line_no));
        Key key;
        if (cols[1] != "-") {
            for (const auto& t : split_ws(cols[1])) {
                if (t == kBos) key.push_back(lm.bos_id_);
                else {
                    auto it = lm.ids_.find(t);
                    if (it == lm.ids_.end()) throw Error(ErrorCode::kMalformedRow, "n-gram line " + std::to_string(line_no));
                    key.push_back(it->second);
                }
            }
        }
        if (key.size() != k - 1) throw Error(ErrorCode::kMalformedRow, "n-gram line " + std::to_string(line_no));
        const double value = std::exp(std::stod(cols[3]));
        if (cols[2] == "<backoff>") {
            lm.backoff_[k - 1][key] = value;
        } else {
            auto it = lm.ids_.find(cols[2]);
            if (it == lm.ids_.end()) throw Error(ErrorCode::kMalformedRow, "n-gram line " + std::to_string(line_no));
            key.push_back(it->second);
            lm.probs_[k - 1][key] = value;
        }
    }
    if (!vocab_done) throw Error(ErrorCode::kMalformedRow, "n-gram file: no entries");
    return lm;
}

void NgramLm::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
    out << to_text();
}

NgramLm NgramLm::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
}

}  // namespace databoost
