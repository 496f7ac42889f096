// Copyright 2026 The databoost Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "databoost/corpus.hpp"

namespace databoost {

/// Token counts per (word, class) over a preprocessed corpus.
struct CountTable {
    std::vector<std::string> classes;
    std::vector<std::map<std::string, std::size_t>> class_word_counts;
    std::vector<std::size_t> class_totals;
    std::map<std::string, std::size_t> word_totals;

    std::size_t class_index(std::string_view cls) const;
    std::size_t count(std::string_view word, std::size_t cls) const;
};

/// Multiplicity counts of every preprocessed token, grouped by label.
CountTable count_tokens(const Dataset& train, const PreprocessConfig& cfg);

/// Geometric mean of P(class | word) and P(word | class) estimated from counts.
double salience_score(const CountTable& ct, std::string_view word, std::string_view cls);
double salience_score(const CountTable& ct, std::string_view word, std::size_t cls);

struct LexiconEntry {
    std::string word;
    double score = 0.0;

    bool operator==(const LexiconEntry&) const = default;
};

/// Top-N salient words per class, best first.
class Lexicon {
  public:
    Lexicon() = default;
    Lexicon(std::vector<std::string> classes, std::vector<std::vector<LexiconEntry>> entries);

    const std::vector<std::string>& classes() const { return classes_; }
    const std::vector<LexiconEntry>& entries(std::string_view cls) const;
    const std::vector<LexiconEntry>& entries(std::size_t cls) const { return entries_.at(cls); }
    bool has_class(std::string_view cls) const;

    std::string to_tsv() const;
    static Lexicon from_tsv(std::string_view tsv);
    void save(const std::filesystem::path& path) const;
    static Lexicon load(const std::filesystem::path& path);

    bool operator==(const Lexicon&) const = default;

  private:
    std::vector<std::string> classes_;
    std::vector<std::vector<LexiconEntry>> entries_;
};

/// Per class: words with in-class count >= min_count (and present in `vocab`
/// when given), ranked by salience desc, then in-class count desc, then
/// lexicographically; truncated to n.
Lexicon build_lexicon(const CountTable& ct, std::size_t n, std::size_t min_count, const Vocab* vocab = nullptr);

}  // namespace databoost
