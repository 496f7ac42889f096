// Copyright 2026 The databoost Authors
// SPDX-License-Identifier: Apache-2.0

#include "databoost/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "databoost/error.hpp"
#include "databoost/random.hpp"

namespace databoost {

using json = nlohmann::json;

std::string_view provenance_name(Provenance p) { return p == Provenance::kBoosted ? "boosted" : "original"; }

namespace {

std::optional<Provenance> parse_provenance(std::string_view s) {
    if (s.empty() || s == "original") return Provenance::kOriginal;
    if (s == "boosted") return Provenance::kBoosted;
    return std::nullopt;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string line_msg(std::size_t line, const std::string& what) {
    return "line " + std::to_string(line) + ": " + what;
}

bool is_blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

// Splits one CSV/TSV record starting at `pos`; handles double-quoted fields
// with embedded delimiters, quotes ("") and newlines. Returns false on an
// unterminated quote.
bool next_record(std::string_view content, std::size_t& pos, char delim, std::vector<std::string>& fields,
                 std::size_t& line) {
    fields.clear();
    std::string cur;
    bool in_quotes = false;
    bool field_started = false;
    while (pos < content.size()) {
        const char c = content[pos++];
        if (in_quotes) {
            if (c == '"') {
                if (pos < content.size() && content[pos] == '"') {
                    cur.push_back('"');
                    ++pos;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                cur.push_back(c);
            }
            continue;
        }
        if (c == '"' && !field_started) {
            in_quotes = true;
            field_started = true;
        } else if (c == delim) {
            fields.push_back(std::move(cur));
            cur.clear();
            field_started = false;
        } else if (c == '\n') {
            if (!cur.empty() && cur.back() == '\r') cur.pop_back();
            fields.push_back(std::move(cur));
            return true;
        } else {
            cur.push_back(c);
            field_started = true;
        }
    }
    if (in_quotes) return false;
    if (!cur.empty() && cur.back() == '\r') cur.pop_back();
    fields.push_back(std::move(cur));
    return true;
}

}  // namespace

Dataset::Dataset(std::vector<LabeledExample> examples, std::vector<std::string> classes, SplitTag tag)
    : examples_(std::move(examples)), classes_(std::move(classes)), tag_(tag) {
    if (classes_.empty()) throw Error(ErrorCode::kEmptyDataset, "class set is empty");
    std::unordered_set<std::string> seen;
    for (const auto& c : classes_) {
        if (!seen.insert(c).second) throw Error(ErrorCode::kInvalidArgument, "duplicate class '" + c + "'");
    }
    for (const auto& ex : examples_) {
        if (!seen.count(ex.label)) throw Error(ErrorCode::kUnknownClass, "label '" + ex.label + "' not in class set");
    }
}

Dataset Dataset::from_examples(std::vector<LabeledExample> examples, SplitTag tag) {
    std::vector<std::string> classes;
    std::unordered_set<std::string> seen;
    for (const auto& ex : examples) {
        if (seen.insert(ex.label).second) classes.push_back(ex.label);
    }
    if (classes.empty()) throw Error(ErrorCode::kEmptyDataset, "no examples");
    return Dataset(std::move(examples), std::move(classes), tag);
}

std::optional<std::size_t> Dataset::class_index(std::string_view label) const {
    for (std::size_t i = 0; i < classes_.size(); ++i) {
        if (classes_[i] == label) return i;
    }
    return std::nullopt;
}

std::vector<std::size_t> Dataset::class_counts() const {
    std::vector<std::size_t> counts(classes_.size(), 0);
    for (const auto& ex : examples_) ++counts[*class_index(ex.label)];
    return counts;
}

std::vector<std::vector<std::size_t>> Dataset::indices_by_class() const {
    std::vector<std::vector<std::size_t>> out(classes_.size());
    for (std::size_t i = 0; i < examples_.size(); ++i) out[*class_index(examples_[i].label)].push_back(i);
    return out;
}

Dataset Dataset::with_examples(std::vector<LabeledExample> examples) const {
    return Dataset(std::move(examples), classes_, tag_);
}

Dataset Dataset::with_tag(SplitTag tag) const { return Dataset(examples_, classes_, tag); }

std::optional<DataFormat> parse_data_format(std::string_view name) {
    if (name == "jsonl" || name == "json") return DataFormat::kJsonl;
    if (name == "csv") return DataFormat::kCsv;
    if (name == "tsv") return DataFormat::kTsv;
    return std::nullopt;
}

DataFormat format_from_path(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".csv") return DataFormat::kCsv;
    if (ext == ".tsv") return DataFormat::kTsv;
    return DataFormat::kJsonl;
}

Dataset parse_jsonl(std::string_view content) {
    std::vector<LabeledExample> rows;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < content.size()) {
        std::size_t end = content.find('\n', pos);
        if (end == std::string_view::npos) end = content.size();
        std::string_view line = content.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (is_blank(line)) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw Error(ErrorCode::kMalformedRow, line_msg(line_no, e.what()));
        }
        if (!obj.is_object()) throw Error(ErrorCode::kMalformedRow, line_msg(line_no, "not a JSON object"));
        for (const char* field : {"text", "label"}) {
            if (!obj.contains(field)) {
                throw Error(ErrorCode::kMissingField, line_msg(line_no, std::string("missing field '") + field + "'"));
            }
            if (!obj[field].is_string()) {
                throw Error(ErrorCode::kMalformedRow, line_msg(line_no, std::string("field '") + field + "' is not a string"));
            }
        }
        LabeledExample ex{obj["text"].get<std::string>(), obj["label"].get<std::string>(), Provenance::kOriginal, {}};
        if (obj.contains("provenance")) {
            const auto p = obj["provenance"].is_string() ? parse_provenance(obj["provenance"].get<std::string>())
                                                         : std::nullopt;
            if (!p) throw Error(ErrorCode::kMalformedRow, line_msg(line_no, "bad provenance"));
            ex.provenance = *p;
        }
        if (obj.contains("diag_ref") && obj["diag_ref"].is_string()) ex.diag_ref = obj["diag_ref"].get<std::string>();
        rows.push_back(std::move(ex));
    }
    if (rows.empty()) throw Error(ErrorCode::kEmptyDataset, "no rows");
    return Dataset::from_examples(std::move(rows));
}

Dataset parse_delimited(std::string_view content, char delimiter) {
    std::size_t pos = 0;
    std::size_t line = 1;
    std::vector<std::string> fields;
    // Skip leading blank lines before the header.
    while (pos < content.size() && (content[pos] == '\n' || content[pos] == '\r')) {
        if (content[pos] == '\n') ++line;
        ++pos;
    }
    if (pos >= content.size()) throw Error(ErrorCode::kEmptyDataset, "empty file");
    if (!next_record(content, pos, delimiter, fields, line)) {
        throw Error(ErrorCode::kMalformedRow, line_msg(line, "unterminated quote in header"));
    }
    int text_col = -1, label_col = -1, prov_col = -1;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i] == "text") text_col = static_cast<int>(i);
        else if (fields[i] == "label") label_col = static_cast<int>(i);
        else if (fields[i] == "provenance") prov_col = static_cast<int>(i);
    }
    if (text_col < 0 || label_col < 0) {
        throw Error(ErrorCode::kMissingField, line_msg(line, "header must contain text and label columns"));
    }
    const auto needed = static_cast<std::size_t>(std::max({text_col, label_col, prov_col})) + 1;
    std::vector<LabeledExample> rows;
    while (pos < content.size()) {
        ++line;
        const std::size_t row_line = line;
        if (!next_record(content, pos, delimiter, fields, line)) {
            throw Error(ErrorCode::kMalformedRow, line_msg(row_line, "unterminated quote"));
        }
        if (fields.size() == 1 && is_blank(fields[0])) continue;
        if (fields.size() < needed) {
            throw Error(ErrorCode::kMalformedRow, line_msg(row_line, "expected at least " + std::to_string(needed) +
                                                                         " columns, got " + std::to_string(fields.size())));
        }
        LabeledExample ex{fields[text_col], fields[label_col], Provenance::kOriginal, {}};
        if (ex.label.empty()) throw Error(ErrorCode::kMalformedRow, line_msg(row_line, "empty label"));
        if (prov_col >= 0) {
            const auto p = parse_provenance(fields[prov_col]);
            if (!p) throw Error(ErrorCode::kMalformedRow, line_msg(row_line, "bad provenance"));
            ex.provenance = *p;
        }
        rows.push_back(std::move(ex));
    }
    if (rows.empty()) throw Error(ErrorCode::kEmptyDataset, "no data rows");
    return Dataset::from_examples(std::move(rows));
}

Dataset ingest(const std::filesystem::path& path, DataFormat format) {
    const std::string content = read_file(path);
    if (is_blank(content)) throw Error(ErrorCode::kEmptyDataset, path.string() + " is empty");
    switch (format) {
        case DataFormat::kJsonl: return parse_jsonl(content);
        case DataFormat::kCsv: return parse_delimited(content, ',');
        case DataFormat::kTsv: return parse_delimited(content, '\t');
    }
    throw Error(ErrorCode::kInvalidArgument, "unknown format");
}

std::string to_jsonl(const Dataset& ds) {
    std::string out;
    for (const auto& ex : ds.examples()) {
        json obj;
        obj["text"] = ex.text;
        obj["label"] = ex.label;
        obj["provenance"] = std::string(provenance_name(ex.provenance));
        if (!ex.diag_ref.empty()) obj["diag_ref"] = ex.diag_ref;
        out += obj.dump();
        out.push_back('\n');
    }
    return out;
}

void write_jsonl(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
    out << to_jsonl(ds);
}

// ---------------------------------------------------------------- Vocab

Vocab::Vocab() : id_to_token_{"<s>", "</s>", "<unk>"} {
    for (std::size_t i = 0; i < id_to_token_.size(); ++i) token_to_id_[id_to_token_[i]] = static_cast<TokenId>(i);
}

Vocab::Vocab(const std::vector<std::string>& tokens) : Vocab() {
    for (const auto& t : tokens) {
        if (t.empty()) throw Error(ErrorCode::kInvalidArgument, "empty token in vocabulary");
        if (!token_to_id_.emplace(t, static_cast<TokenId>(id_to_token_.size())).second) {
            throw Error(ErrorCode::kInvalidArgument, "duplicate token '" + t + "'");
        }
        id_to_token_.push_back(t);
    }
}

TokenId Vocab::id(std::string_view token) const {
    auto it = token_to_id_.find(std::string(token));
    return it == token_to_id_.end() ? kUnk : it->second;
}

bool Vocab::contains(std::string_view token) const { return token_to_id_.count(std::string(token)) > 0; }

const std::string& Vocab::token(TokenId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size()) {
        throw Error(ErrorCode::kInvalidArgument, "token id out of range: " + std::to_string(id));
    }
    return id_to_token_[static_cast<std::size_t>(id)];
}

std::vector<TokenId> Vocab::encode(const std::vector<std::string>& tokens) const {
    std::vector<TokenId> ids;
    ids.reserve(tokens.size());
    for (const auto& t : tokens) ids.push_back(id(t));
    return ids;
}

std::string Vocab::decode(const std::vector<TokenId>& ids) const {
    std::string out;
    for (TokenId t : ids) {
        if (t == kBos || t == kEos) continue;
        if (!out.empty()) out.push_back(' ');
        out += token(t);
    }
    return out;
}

std::string Vocab::to_text() const {
    std::string out;
    for (std::size_t i = kNumSpecial; i < id_to_token_.size(); ++i) {
        out += id_to_token_[i];
        out.push_back('\n');
    }
    return out;
}

Vocab Vocab::from_text(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string tok(text.substr(pos, end - pos));
        if (!tok.empty() && tok.back() == '\r') tok.pop_back();
        if (!tok.empty()) tokens.push_back(std::move(tok));
        pos = end + 1;
    }
    return Vocab(tokens);
}

void Vocab::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
    out << to_text();
}

Vocab Vocab::load(const std::filesystem::path& path) { return from_text(read_file(path)); }

// ---------------------------------------------------------------- preprocessing

const std::vector<std::string>& default_stopwords() {
    static const std::vector<std::string> words = {
        "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are", "as", "at",
        "be", "because", "been", "before", "being", "below", "between", "both", "but", "by", "can", "could",
        "did", "do", "does", "doing", "down", "during", "each", "few", "for", "from", "further", "had", "has",
        "have", "having", "he", "her", "here", "hers", "herself", "him", "himself", "his", "how", "i", "if",
        "in", "into", "is", "it", "its", "itself", "just", "me", "more", "most", "my", "myself", "no", "nor",
        "not", "now", "of", "off", "on", "once", "only", "or", "other", "ought", "our", "ours", "ourselves",
        "out", "over", "own", "same", "she", "should", "so", "some", "such", "than", "that", "the", "their",
        "theirs", "them", "themselves", "then", "there", "these", "they", "this", "those", "through", "to",
        "too", "under", "until", "up", "very", "was", "we", "were", "what", "when", "where", "which", "while",
        "who", "whom", "why", "will", "with", "would", "you", "your", "yours", "yourself", "yourselves", "s",
        "t", "don", "d", "ll", "m", "o", "re", "ve", "y", "ain", "aren", "couldn", "didn",
        "doesn", "hadn", "hasn", "haven", "isn", "ma", "mightn", "mustn", "needn", "shan", "shouldn", "wasn",
        "weren", "won", "wouldn",
    };
    return words;
}

std::unordered_set<std::string> load_stopwords(const std::filesystem::path& path) {
    const std::string content = read_file(path);
    std::unordered_set<std::string> out;
    std::istringstream in(content);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) out.insert(line);
    }
    return out;
}

PreprocessConfig PreprocessConfig::standard() {
    PreprocessConfig cfg;
    cfg.stopwords.insert(default_stopwords().begin(), default_stopwords().end());
    return cfg;
}

namespace {

bool is_url(std::string_view tok) {
    return tok.starts_with("http://") || tok.starts_with("https://") || tok.starts_with("www.") ||
           tok.find("://") != std::string_view::npos;
}

}  // namespace

std::optional<std::vector<std::string>> preprocess(std::string_view text, const PreprocessConfig& cfg) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        if (j == i) break;
        std::string tok(text.substr(i, j - i));
        i = j;
        for (char& c : tok) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (cfg.strip_urls && is_url(tok)) continue;
        if (cfg.strip_hashtags && tok.front() == '#') continue;
        if (cfg.strip_punctuation) {
            std::erase_if(tok, [](char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; });
        }
        if (tok.empty() || cfg.stopwords.count(tok)) continue;
        out.push_back(std::move(tok));
    }
    if (out.empty() || out.size() > cfg.max_tokens) return std::nullopt;
    return out;
}

std::optional<std::vector<TokenId>> preprocess_ids(std::string_view text, const PreprocessConfig& cfg,
                                                   const Vocab& vocab) {
    auto toks = preprocess(text, cfg);
    if (!toks) return std::nullopt;
    return vocab.encode(*toks);
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out.push_back(' ');
        out += t;
    }
    return out;
}

Dataset preprocess_dataset(const Dataset& ds, const PreprocessConfig& cfg, PreprocessStats* stats) {
    PreprocessStats local;
    std::vector<LabeledExample> rows;
    rows.reserve(ds.size());
    for (const auto& ex : ds.examples()) {
        auto toks = preprocess(ex.text, cfg);
        if (!toks) {
            // Distinguish the two drop reasons for the stats.
            PreprocessConfig unbounded = cfg;
            unbounded.max_tokens = static_cast<std::size_t>(-1);
            if (preprocess(ex.text, unbounded)) ++local.dropped_long;
            else ++local.dropped_empty;
            continue;
        }
        LabeledExample out = ex;
        out.text = join_tokens(*toks);
        rows.push_back(std::move(out));
        ++local.kept;
    }
    if (stats) *stats = local;
    return ds.with_examples(std::move(rows));
}

// ---------------------------------------------------------------- splitting

std::vector<std::size_t> largest_remainder(const std::vector<double>& quotas) {
    constexpr double kSlack = 1e-9;
    double total = 0.0;
    for (double q : quotas) total += q;
    const auto target = static_cast<std::size_t>(std::llround(total));
    std::vector<std::size_t> out(quotas.size());
    std::size_t assigned = 0;
    std::vector<std::pair<double, std::size_t>> rem;
    for (std::size_t i = 0; i < quotas.size(); ++i) {
        const double f = std::floor(quotas[i] + kSlack);
        out[i] = static_cast<std::size_t>(f);
        assigned += out[i];
        rem.emplace_back(quotas[i] - f, i);
    }
    // Largest remainder first, ties by original index.
    std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first + kSlack; });
    for (std::size_t r = 0; assigned < target && r < rem.size(); ++r, ++assigned) ++out[rem[r].second];
    return out;
}

std::pair<Dataset, Dataset> split_stratified(const Dataset& ds, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw Error(ErrorCode::kInvalidArgument, "test_fraction must be in (0, 1)");
    }
    const auto by_class = ds.indices_by_class();
    std::vector<double> quotas;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        if (by_class[c].size() < 2) {
            throw Error(ErrorCode::kStratifyImpossible,
                        "class '" + ds.classes()[c] + "' has " + std::to_string(by_class[c].size()) + " example(s)");
        }
        quotas.push_back(test_fraction * static_cast<double>(by_class[c].size()));
    }
    auto test_counts = largest_remainder(quotas);
    std::vector<bool> in_test(ds.size(), false);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        const std::size_t n = by_class[c].size();
        test_counts[c] = std::clamp<std::size_t>(test_counts[c], 1, n - 1);
        Rng rng(derive_seed(seed, c));
        auto idx = by_class[c];
        rng.shuffle(idx);
        for (std::size_t i = 0; i < test_counts[c]; ++i) in_test[idx[i]] = true;
    }
    std::vector<LabeledExample> train, test;
    for (std::size_t i = 0; i < ds.size(); ++i) (in_test[i] ? test : train).push_back(ds.examples()[i]);
    return {Dataset(std::move(train), ds.classes(), SplitTag::kTrain),
            Dataset(std::move(test), ds.classes(), SplitTag::kTest)};
}

Dataset starve(const Dataset& train, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "fraction must be in (0, 1]");
    if (fraction == 1.0) return train;
    const auto by_class = train.indices_by_class();
    std::vector<double> quotas;
    for (const auto& idx : by_class) quotas.push_back(fraction * static_cast<double>(idx.size()));
    const auto counts = largest_remainder(quotas);
    std::vector<bool> keep(train.size(), false);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        if (counts[c] == 0) {
            throw Error(ErrorCode::kStarvedClassEmpty, "class '" + train.classes()[c] + "' receives no examples");
        }
        Rng rng(derive_seed(seed, 1000 + c));
        auto idx = by_class[c];
        rng.shuffle(idx);
        for (std::size_t i = 0; i < counts[c]; ++i) keep[idx[i]] = true;
    }
    std::vector<LabeledExample> rows;
    for (std::size_t i = 0; i < train.size(); ++i) {
        if (keep[i]) rows.push_back(train.examples()[i]);
    }
    return train.with_examples(std::move(rows));
}

Vocab build_vocab(const Dataset& train, const PreprocessConfig& cfg, std::size_t min_count) {
    std::map<std::string, std::size_t> freq;
    std::size_t total = 0;
    for (const auto& ex : train.examples()) {
        auto toks = preprocess(ex.text, cfg);
        if (!toks) continue;
        for (auto& t : *toks) {
            ++freq[t];
            ++total;
        }
    }
    if (total == 0) throw Error(ErrorCode::kEmptyCorpus, "no tokens after preprocessing");
    std::vector<std::pair<std::string, std::size_t>> items;
    for (auto& [tok, n] : freq) {
        if (n >= min_count) items.emplace_back(tok, n);
    }
    if (items.empty()) {
        throw Error(ErrorCode::kEmptyVocab, "no token reaches min_count=" + std::to_string(min_count));
    }
    std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    std::vector<std::string> tokens;
    tokens.reserve(items.size());
    for (auto& [tok, n] : items) tokens.push_back(tok);
    return Vocab(tokens);
}

}  // namespace databoost
