// Copyright 2026 The databoost Authors
// SPDX-License-Identifier: Apache-2.0

#include "databoost/salience.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "databoost/error.hpp"

namespace databoost {

std::size_t CountTable::class_index(std::string_view cls) const {
    for (std::size_t i = 0; i < classes.size(); ++i) {
        if (classes[i] == cls) return i;
    }
    throw Error(ErrorCode::kUnknownClass, "unknown class '" + std::string(cls) + "'");
}

std::size_t CountTable::count(std::string_view word, std::size_t cls) const {
    const auto& m = class_word_counts.at(cls);
    auto it = m.find(std::string(word));
    return it == m.end() ? 0 : it->second;
}

CountTable count_tokens(const Dataset& train, const PreprocessConfig& cfg) {
    CountTable ct;
    ct.classes = train.classes();
    ct.class_word_counts.resize(ct.classes.size());
    ct.class_totals.assign(ct.classes.size(), 0);
    for (const auto& ex : train.examples()) {
        const auto toks = preprocess(ex.text, cfg);
        if (!toks) continue;
        const std::size_t c = *train.class_index(ex.label);
        for (const auto& t : *toks) {
            ++ct.class_word_counts[c][t];
            ++ct.class_totals[c];
            ++ct.word_totals[t];
        }
    }
    if (ct.word_totals.empty()) throw Error(ErrorCode::kEmptyCorpus, "no tokens after preprocessing");
    for (std::size_t c = 0; c < ct.classes.size(); ++c) {
        if (ct.class_totals[c] == 0) throw Error(ErrorCode::kEmptyClass, "class '" + ct.classes[c] + "' has no tokens");
    }
    return ct;
}

double salience_score(const CountTable& ct, std::string_view word, std::size_t cls) {
    if (cls >= ct.classes.size()) throw Error(ErrorCode::kUnknownClass, "class index out of range");
    const std::size_t n = ct.count(word, cls);
    if (n == 0) return 0.0;
    const double p_class_given_word = static_cast<double>(n) / static_cast<double>(ct.word_totals.at(std::string(word)));
    const double p_word_given_class = static_cast<double>(n) / static_cast<double>(ct.class_totals[cls]);
    return std::sqrt(p_class_given_word * p_word_given_class);
}

double salience_score(const CountTable& ct, std::string_view word, std::string_view cls) {
    return salience_score(ct, word, ct.class_index(cls));
}

Lexicon build_lexicon(const CountTable& ct, std::size_t n, std::size_t min_count, const Vocab* vocab) {
    if (n == 0) throw Error(ErrorCode::kInvalidArgument, "lexicon size must be >= 1");
    std::vector<std::vector<LexiconEntry>> entries(ct.classes.size());
    for (std::size_t c = 0; c < ct.classes.size(); ++c) {
        struct Candidate {
            double score;
            std::size_t count;
            std::size_t word_total;
            const std::string* word;
        };
        std::vector<Candidate> cands;
        for (const auto& [word, cnt] : ct.class_word_counts[c]) {
            if (cnt < std::max<std::size_t>(min_count, 1)) continue;
            if (vocab && !vocab->contains(word)) continue;
            cands.push_back({salience_score(ct, word, c), cnt, ct.word_totals.at(word), &word});
        }
        if (cands.empty()) {
            throw Error(ErrorCode::kEmptyClass, "class '" + ct.classes[c] + "' has no word with count >= " +
                                                    std::to_string(min_count));
        }
        // Within one class the squared score is count^2 / word_total up to a
        // shared factor, so ranking compares exact integer cross products and
        // equal scores tie exactly regardless of floating-point rounding.
        std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
            using U = unsigned __int128;
            const U lhs = U(a.count) * a.count * b.word_total;
            const U rhs = U(b.count) * b.count * a.word_total;
            if (lhs != rhs) return lhs > rhs;
            if (a.count != b.count) return a.count > b.count;
            return *a.word < *b.word;
        });
        if (cands.size() > n) cands.resize(n);
        for (const auto& cand : cands) entries[c].push_back({*cand.word, cand.score});
    }
    return Lexicon(ct.classes, std::move(entries));
}

Lexicon::Lexicon(std::vector<std::string> classes, std::vector<std::vector<LexiconEntry>> entries)
    : classes_(std::move(classes)), entries_(std::move(entries)) {
    if (classes_.size() != entries_.size()) throw Error(ErrorCode::kInvalidArgument, "lexicon class/entry mismatch");
}

bool Lexicon::has_class(std::string_view cls) const {
    return std::find(classes_.begin(), classes_.end(), cls) != classes_.end();
}

const std::vector<LexiconEntry>& Lexicon::entries(std::string_view cls) const {
    for (std::size_t i = 0; i < classes_.size(); ++i) {
        if (classes_[i] == cls) return entries_[i];
    }
    throw Error(ErrorCode::kUnknownClass, "lexicon has no class '" + std::string(cls) + "'");
}

std::string Lexicon::to_tsv() const {
    std::string out = "class\tword\tscore\n";
    char buf[64];
    for (std::size_t c = 0; c < classes_.size(); ++c) {
        for (const auto& e : entries_[c]) {
            std::snprintf(buf, sizeof(buf), "%.17g", e.score);
            out += classes_[c] + "\t" + e.word + "\t" + buf + "\n";
        }
    }
    return out;
}

Lexicon Lexicon::from_tsv(std::string_view tsv) {
    std::vector<std::string> classes;
    std::vector<std::vector<LexiconEntry>> entries;
    std::istringstream in{std::string(tsv)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || (line_no == 1 && line == "class\tword\tscore")) continue;
        const auto t1 = line.find('\t');
        const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t2 == std::string::npos) {
            throw Error(ErrorCode::kMalformedRow, "lexicon line " + std::to_string(line_no) + ": expected 3 columns");
        }
        const std::string cls = line.substr(0, t1);
        LexiconEntry e{line.substr(t1 + 1, t2 - t1 - 1), 0.0};
        try {
            e.score = std::stod(line.substr(t2 + 1));
        } catch (const std::exception&) {
            throw Error(ErrorCode::kMalformedRow, "lexicon line " + std::to_string(line_no) + ": bad score");
        }
        auto it = std::find(classes.begin(), classes.end(), cls);
        if (it == classes.end()) {
            classes.push_back(cls);
            entries.emplace_back();
            it = classes.end() - 1;
        }
        entries[static_cast<std::size_t>(it - classes.begin())].push_back(std::move(e));
    }
    if (classes.empty()) throw Error(ErrorCode::kEmptyDataset, "lexicon file has no entries");
    return Lexicon(std::move(classes), std::move(entries));
}

void Lexicon::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
    out << to_tsv();
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_tsv(ss.str());
}

}  // namespace databoost
