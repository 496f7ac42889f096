// Copyright 2026 The databoost Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "databoost/corpus.hpp"
#include "databoost/error.hpp"
#include "databoost/random.hpp"

using namespace databoost;

namespace {

Dataset make_dataset(std::size_t a, std::size_t b) {
    std::vector<LabeledExample> rows;
    for (std::size_t i = 0; i < a; ++i) rows.push_back({"alpha text " + std::to_string(i), "A"});
    for (std::size_t i = 0; i < b; ++i) rows.push_back({"beta text " + std::to_string(i), "B"});
    return Dataset(rows, {"A", "B"});
}

template <class F>
ErrorCode code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::kIo;
}

}  // namespace

TEST_CASE("jsonl round trip keeps text, label and provenance") {
    std::vector<LabeledExample> rows{{"hello, \"world\"", "pos"}, {"bad\nday", "neg", Provenance::kBoosted, "neg:3"}};
    Dataset ds = Dataset::from_examples(rows);
    Dataset back = parse_jsonl(to_jsonl(ds));
    CHECK(back.examples() == ds.examples());
    CHECK(back.classes() == ds.classes());
}

TEST_CASE("jsonl errors carry codes and line numbers") {
    CHECK(code_of([] { parse_jsonl(""); }) == ErrorCode::kEmptyDataset);
    CHECK(code_of([] { parse_jsonl("{\"text\":\"a\",\"label\":\"x\"}\n{\"text\":\"b\"}\n"); }) ==
          ErrorCode::kMissingField);
    try {
        parse_jsonl("{\"text\":\"a\",\"label\":\"x\"}\n{not json\n");
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::kMalformedRow);
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("csv with quoted delimiters and tsv parse") {
    Dataset csv = parse_delimited("text,label\n\"a, b\",x\n\"say \"\"hi\"\"\",y\n", ',');
    REQUIRE(csv.size() == 2);
    CHECK(csv.examples()[0].text == "a, b");
    CHECK(csv.examples()[1].text == "say \"hi\"");
    Dataset tsv = parse_delimited("label\ttext\nx\tone two\n", '\t');
    CHECK(tsv.examples()[0].text == "one two");
    CHECK(tsv.examples()[0].label == "x");
    CHECK(code_of([] { parse_delimited("text,label\nonly\n", ','); }) == ErrorCode::kMalformedRow);
    CHECK(code_of([] { parse_delimited("label\nx\n", ','); }) == ErrorCode::kMissingField);
}

TEST_CASE("ingest reads files and rejects missing paths") {
    auto dir = std::filesystem::temp_directory_path() / "databoost_corpus_test";
    std::filesystem::create_directories(dir);
    auto p = dir / "d.csv";
    std::ofstream(p) << "text,label\nfoo,a\nbar,b\n";
    CHECK(format_from_path(p) == DataFormat::kCsv);
    CHECK(ingest(p, DataFormat::kCsv).size() == 2);
    CHECK(code_of([&] { ingest(dir / "missing.jsonl", DataFormat::kJsonl); }) == ErrorCode::kIo);
    std::filesystem::remove_all(dir);
}

TEST_CASE("preprocess lowercases, strips urls, hashtags, punctuation and stopwords") {
    auto cfg = PreprocessConfig::standard();
    auto toks = preprocess("The Movie was GREAT!! see https://x.co/abc #fun www.site.com", cfg);
    REQUIRE(toks);
    CHECK(*toks == std::vector<std::string>{"movie", "great", "see"});
    CHECK_FALSE(preprocess("the a an", cfg));
    CHECK_FALSE(preprocess("", cfg));
    PreprocessConfig small = cfg;
    small.max_tokens = 2;
    CHECK_FALSE(preprocess("one two three", small));
    CHECK(preprocess("one two", small)->size() == 2);
}

TEST_CASE("preprocess_dataset reports drops") {
    Dataset ds = Dataset::from_examples({{"good film", "p"}, {"the", "n"}, {"bad film", "n"}});
    PreprocessStats st;
    Dataset out = preprocess_dataset(ds, PreprocessConfig::standard(), &st);
    CHECK(out.size() == 2);
    CHECK(st.kept == 2);
    CHECK(st.dropped_empty == 1);
    CHECK(out.classes() == ds.classes());
}

TEST_CASE("stratified split counts follow the class ratio") {
    // 60 A + 40 B at 20% test: 12 A and 8 B held out.
    auto [train, test] = split_stratified(make_dataset(60, 40), 0.2, 3);
    CHECK(test.class_counts() == std::vector<std::size_t>{12, 8});
    CHECK(train.class_counts() == std::vector<std::size_t>{48, 32});
    CHECK(train.split_tag() == SplitTag::kTrain);
    CHECK(test.split_tag() == SplitTag::kTest);
    std::set<std::string> seen;
    for (const auto& e : train.examples()) seen.insert(e.text);
    for (const auto& e : test.examples()) CHECK(seen.insert(e.text).second);
    CHECK(seen.size() == 100);
}

TEST_CASE("split is deterministic and rejects singleton classes") {
    auto a = split_stratified(make_dataset(30, 20), 0.3, 9);
    auto b = split_stratified(make_dataset(30, 20), 0.3, 9);
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
    CHECK(code_of([] { split_stratified(make_dataset(10, 1), 0.2, 1); }) == ErrorCode::kStratifyImpossible);
}

TEST_CASE("starve keeps the class ratio") {
    Dataset train = make_dataset(48, 32);
    // 10% of 48 and 32 rounds to 5 and 3.
    Dataset s = starve(train, 0.1, 4);
    CHECK(s.class_counts() == std::vector<std::size_t>{5, 3});
    Dataset tiny = starve(make_dataset(80, 20), 0.05, 4);
    CHECK(tiny.class_counts() == std::vector<std::size_t>{4, 1});
    CHECK(code_of([] { starve(make_dataset(50, 50), 0.001, 1); }) == ErrorCode::kStarvedClassEmpty);
    CHECK(starve(train, 1.0, 4) == train);
    CHECK(code_of([&] { starve(make_dataset(40, 2), 0.1, 1); }) == ErrorCode::kStarvedClassEmpty);
}

TEST_CASE("largest remainder apportionment") {
    CHECK(largest_remainder({1.5, 1.5, 1.0}) == std::vector<std::size_t>{2, 1, 1});
    CHECK(largest_remainder({0.2, 0.3, 0.5}) == std::vector<std::size_t>{0, 0, 1});
    CHECK(largest_remainder({3.0, 4.0}) == std::vector<std::size_t>{3, 4});
}

TEST_CASE("vocab ordering, specials and round trip") {
    Dataset ds = Dataset::from_examples({{"b a b", "x"}, {"c b", "y"}});
    PreprocessConfig cfg;  // no stopwords
    Vocab v = build_vocab(ds, cfg, 1);
    // <s>, </s>, <unk>, b (3), a (1), c (1)
    CHECK(v.size() == 6);
    CHECK(v.id("b") == 3);
    CHECK(v.id("a") == 4);
    CHECK(v.id("zzz") == Vocab::kUnk);
    CHECK(Vocab::from_text(v.to_text()) == v);
    CHECK(v.decode(v.encode({"a", "c"})) == "a c");
    Vocab v2 = build_vocab(ds, cfg, 2);
    CHECK(v2.size() == 4);
    CHECK(code_of([&] { build_vocab(ds, cfg, 5); }) == ErrorCode::kEmptyVocab);
}

TEST_CASE("vocab from 'a a b'") {
    Dataset ds = Dataset::from_examples({{"a a b", "x"}});
    Vocab v = build_vocab(ds, PreprocessConfig{}, 1);
    CHECK(v.size() == 5);
    CHECK(v.id("a") == 3);
    CHECK(v.id("b") == 4);
    CHECK(code_of([&] { build_vocab(ds, PreprocessConfig{}, 3); }) == ErrorCode::kEmptyVocab);
}

TEST_CASE("preprocess worked examples") {
    PreprocessConfig cfg;
    cfg.stopwords = {"so", "the", "is", "very"};
    CHECK(*preprocess("So Cute! The baby is very lovely!", cfg) == std::vector<std::string>{"cute", "baby", "lovely"});
    CHECK_FALSE(preprocess("#fun http://x.co !!!", cfg));
    std::string long_text, ok_text;
    for (int i = 0; i < 31; ++i) long_text += "w" + std::to_string(i) + " ";
    for (int i = 0; i < 30; ++i) ok_text += "w" + std::to_string(i) + " ";
    CHECK_FALSE(preprocess(long_text, cfg));
    CHECK(preprocess(ok_text, cfg)->size() == 30);
}

TEST_CASE("preprocess is idempotent on random strings") {
    Rng rng(21);
    const std::string alphabet = "abcAB .,!#:/w";
    auto cfg = PreprocessConfig::standard();
    for (int trial = 0; trial < 500; ++trial) {
        std::string s;
        const std::size_t len = rng.below(40);
        for (std::size_t i = 0; i < len; ++i) s.push_back(alphabet[rng.below(alphabet.size())]);
        auto once = preprocess(s, cfg);
        if (!once) continue;
        auto twice = preprocess(join_tokens(*once), cfg);
        REQUIRE(twice);
        CHECK(*twice == *once);
    }
}

TEST_CASE("stratified split stays within one example of the exact proportion") {
    Rng rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t k = 2 + rng.below(4);
        std::vector<LabeledExample> rows;
        std::vector<std::string> classes;
        std::vector<std::size_t> sizes;
        for (std::size_t c = 0; c < k; ++c) {
            classes.push_back("c" + std::to_string(c));
            sizes.push_back(2 + rng.below(60));
            for (std::size_t i = 0; i < sizes.back(); ++i) rows.push_back({"t" + std::to_string(rows.size()), classes.back()});
        }
        const double frac = 0.05 + 0.9 * rng.uniform();
        Dataset ds(rows, classes);
        auto [train, test] = split_stratified(ds, frac, rng.next_u64());
        CHECK(train.size() + test.size() == ds.size());
        const auto tc = test.class_counts();
        for (std::size_t c = 0; c < k; ++c) {
            CHECK(std::abs(static_cast<double>(tc[c]) - frac * static_cast<double>(sizes[c])) <= 1.0 + 1e-9);
        }
        const double sf = 0.05 + 0.95 * rng.uniform();
        try {
            Dataset s = starve(train, sf, 1);
            CHECK(std::abs(static_cast<double>(s.size()) - sf * static_cast<double>(train.size())) <=
                  static_cast<double>(k));
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::kStarvedClassEmpty);
        }
    }
}

TEST_CASE("shipped stopword file matches the built-in list") {
    const auto path = std::filesystem::path(DATABOOST_SOURCE_DIR) / "data" / "stopwords_en.txt";
    auto from_file = load_stopwords(path);
    std::unordered_set<std::string> builtin(default_stopwords().begin(), default_stopwords().end());
    CHECK(from_file == builtin);
}

TEST_CASE("dataset validation") {
    CHECK(code_of([] { Dataset({{"x", "C"}}, {"A", "B"}); }) == ErrorCode::kUnknownClass);
    CHECK(code_of([] { Dataset({}, {}); }) == ErrorCode::kEmptyDataset);
    Dataset ds = make_dataset(2, 3);
    CHECK(ds.class_index("B") == 1u);
    CHECK_FALSE(ds.class_index("C"));
}
