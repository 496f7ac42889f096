// Copyright 2026 The databoost Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace databoost {

enum class Provenance { kOriginal, kBoosted };

std::string_view provenance_name(Provenance p);

struct LabeledExample {
    std::string text;
    std::string label;
    Provenance provenance = Provenance::kOriginal;
    // Optional pointer into a diagnostics stream for generated rows.
    std::string diag_ref;

    bool operator==(const LabeledExample&) const = default;
};

enum class SplitTag { kUnsplit, kTrain, kTest };

/// Ordered labeled corpus with a fixed class set. Immutable once built.
class Dataset {
  public:
    Dataset() = default;
    /// Validates that every label is in `classes` and that classes is non-empty
    /// and duplicate-free.
    Dataset(std::vector<LabeledExample> examples, std::vector<std::string> classes,
            SplitTag tag = SplitTag::kUnsplit);

    /// Classes taken from labels in order of first appearance.
    static Dataset from_examples(std::vector<LabeledExample> examples, SplitTag tag = SplitTag::kUnsplit);

    const std::vector<LabeledExample>& examples() const { return examples_; }
    const std::vector<std::string>& classes() const { return classes_; }
    SplitTag split_tag() const { return tag_; }
    std::size_t size() const { return examples_.size(); }
    bool empty() const { return examples_.empty(); }
    std::size_t num_classes() const { return classes_.size(); }

    std::optional<std::size_t> class_index(std::string_view label) const;
    /// Examples per class, indexed like classes().
    std::vector<std::size_t> class_counts() const;
    /// Indices of examples of each class, in dataset order.
    std::vector<std::vector<std::size_t>> indices_by_class() const;

    /// Same classes and tag, different rows.
    Dataset with_examples(std::vector<LabeledExample> examples) const;
    Dataset with_tag(SplitTag tag) const;

    bool operator==(const Dataset&) const = default;

  private:
    std::vector<LabeledExample> examples_;
    std::vector<std::string> classes_;
    SplitTag tag_ = SplitTag::kUnsplit;
};

enum class DataFormat { kJsonl, kCsv, kTsv };

std::optional<DataFormat> parse_data_format(std::string_view name);
/// Guess from extension (.jsonl/.json, .csv, .tsv); defaults to JSONL.
DataFormat format_from_path(const std::filesystem::path& path);

Dataset ingest(const std::filesystem::path& path, DataFormat format);
Dataset parse_jsonl(std::string_view content);
Dataset parse_delimited(std::string_view content, char delimiter);

std::string to_jsonl(const Dataset& ds);
void write_jsonl(const Dataset& ds, const std::filesystem::path& path);

using TokenId = std::int32_t;

/// Token/id bijection with three reserved ids.
class Vocab {
  public:
    static constexpr TokenId kBos = 0;
    static constexpr TokenId kEos = 1;
    static constexpr TokenId kUnk = 2;
    static constexpr std::size_t kNumSpecial = 3;

    Vocab();
    /// Regular tokens in id order (ids start at kNumSpecial).
    explicit Vocab(const std::vector<std::string>& tokens);

    std::size_t size() const { return id_to_token_.size(); }
    TokenId id(std::string_view token) const;
    bool contains(std::string_view token) const;
    const std::string& token(TokenId id) const;
    std::vector<TokenId> encode(const std::vector<std::string>& tokens) const;
    std::string decode(const std::vector<TokenId>& ids) const;
    const std::vector<std::string>& tokens() const { return id_to_token_; }

    /// One regular token per line, id order.
    std::string to_text() const;
    static Vocab from_text(std::string_view text);
    void save(const std::filesystem::path& path) const;
    static Vocab load(const std::filesystem::path& path);

    bool operator==(const Vocab& other) const { return id_to_token_ == other.id_to_token_; }

  private:
    std::vector<std::string> id_to_token_;
    std::unordered_map<std::string, TokenId> token_to_id_;
};

struct PreprocessConfig {
    std::size_t max_tokens = 30;
    std::unordered_set<std::string> stopwords;
    bool strip_punctuation = true;
    bool strip_hashtags = true;
    bool strip_urls = true;

    /// Defaults with the built-in English stopword list.
    static PreprocessConfig standard();
};

/// Built-in English stopword list (also shipped as data/stopwords_en.txt).
const std::vector<std::string>& default_stopwords();
std::unordered_set<std::string> load_stopwords(const std::filesystem::path& path);

/// Lowercase, split on whitespace, drop url/hashtag tokens, strip
/// punctuation, remove stopwords. nullopt when the result is empty or longer
/// than cfg.max_tokens.
std::optional<std::vector<std::string>> preprocess(std::string_view text, const PreprocessConfig& cfg);
std::optional<std::vector<TokenId>> preprocess_ids(std::string_view text, const PreprocessConfig& cfg,
                                                   const Vocab& vocab);

struct PreprocessStats {
    std::size_t kept = 0;
    std::size_t dropped_empty = 0;
    std::size_t dropped_long = 0;
};

/// Rewrites each text to its joined token list and drops filtered rows.
Dataset preprocess_dataset(const Dataset& ds, const PreprocessConfig& cfg, PreprocessStats* stats = nullptr);

std::pair<Dataset, Dataset> split_stratified(const Dataset& ds, double test_fraction, std::uint64_t seed);
Dataset starve(const Dataset& train, double fraction, std::uint64_t seed);

Vocab build_vocab(const Dataset& train, const PreprocessConfig& cfg, std::size_t min_count);

/// Largest-remainder apportionment of round(sum(quotas)) units across quotas.
std::vector<std::size_t> largest_remainder(const std::vector<double>& quotas);

std::string join_tokens(const std::vector<std::string>& tokens);

}  // namespace databoost
