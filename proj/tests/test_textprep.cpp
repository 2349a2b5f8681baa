// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>
#include <vector>

#include "bugcause/rng.hpp"
#include "bugcause/textprep.hpp"

using namespace bugcause;

namespace {

const StopwordSet& stop() { return stopwords("stopwords-v1"); }

std::string upper(std::string s) {
    for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

} // namespace

TEST_CASE("preprocess pipeline on a bug-report title") {
    auto toks = preprocess("Null pointer when closing stream", stop());
    CHECK(toks == std::vector<std::string>{"null", "pointer", "close", "stream"});
}

TEST_CASE("preprocess drops one-char tokens and pure digits") {
    auto toks = preprocess("a 42 x7 crash #2 v2.0", stop());
    // "a" is one char (and a stop word), "42"/"2" are pure digits; "x7"/"v2"
    // mix letters and digits so they stay. "0" is one char.
    CHECK(toks == std::vector<std::string>{"x7", "crash", "v2"});
}

TEST_CASE("preprocess splits on every non-alphanumeric byte") {
    auto toks = preprocess("foo_bar->baz(qux)", stop());
    CHECK(toks == std::vector<std::string>{"foo", "bar", "baz", "qux"});
}

TEST_CASE("stop words are removed after case folding") {
    auto toks = preprocess("The THREAD and the Deadlock", stop());
    CHECK(toks == std::vector<std::string>{"thread", "deadlock"});
}

TEST_CASE("preprocess is invariant under input case") {
    Rng rng(20260826);
    const std::string alphabet = "abcdefghijklmnopqrstuvwxyz0123456789 .,-_()";
    for (int trial = 0; trial < 200; ++trial) {
        std::string text;
        std::size_t len = rng.next_below(60);
        for (std::size_t i = 0; i < len; ++i)
            text += alphabet[rng.next_below(alphabet.size())];
        CAPTURE(text);
        CHECK(preprocess(text, stop()) == preprocess(upper(text), stop()));
    }
}

TEST_CASE("bigrams are built over the post-stop-word stream") {
    VectorizerConfig cfg;
    auto grams = extract_ngrams({"null", "pointer", "close"}, cfg);
    CHECK(grams == std::vector<std::string>{"null", "pointer", "close",
                                            "null_pointer", "pointer_close"});

    cfg.ngram_max = 1;
    CHECK(extract_ngrams({"null", "pointer"}, cfg) ==
          std::vector<std::string>{"null", "pointer"});

    cfg.ngram_min = 2;
    cfg.ngram_max = 2;
    CHECK(extract_ngrams({"null", "pointer", "close"}, cfg) ==
          std::vector<std::string>{"null_pointer", "pointer_close"});
}

TEST_CASE("vocabulary indices are dense and lexicographic") {
    VectorizerConfig cfg;
    cfg.min_df = 1;
    auto fitted = fit_vectorizer({"pointer leak crash", "leak thread", "crash thread leak"}, cfg);
    std::vector<std::string> terms;
    std::uint32_t expected = 0;
    for (const auto& [term, idx] : fitted.vocab.index) {
        CHECK(idx == expected++);
        terms.push_back(term);
    }
    CHECK(std::is_sorted(terms.begin(), terms.end()));
    CHECK(fitted.vocab.df.size() == fitted.vocab.index.size());
    CHECK(fitted.vocab.fitted_docs == 3);
    // Spot-check document frequencies.
    CHECK(fitted.vocab.df[fitted.vocab.index.at("leak")] == 3);
    CHECK(fitted.vocab.df[fitted.vocab.index.at("crash")] == 2);
    CHECK(fitted.vocab.df[fitted.vocab.index.at("leak_thread")] == 1);
}

TEST_CASE("min_df prunes rare terms") {
    VectorizerConfig cfg;
    cfg.ngram_max = 1;
    cfg.min_df = 2;
    auto fitted = fit_vectorizer({"leak buffer", "leak thread"}, cfg);
    CHECK(fitted.dimension() == 1);
    CHECK(fitted.vocab.index.count("leak") == 1);
}

TEST_CASE("max_features keeps highest document frequency, ties by term") {
    VectorizerConfig cfg;
    cfg.ngram_max = 1;
    cfg.min_df = 1;
    cfg.max_features = 2;
    // df: leak=3, buffer=2, thread=2, crash=1. Cap 2 keeps leak plus the
    // lexicographically smaller of the df-2 tie, buffer.
    auto fitted = fit_vectorizer({"leak buffer crash", "leak thread", "leak buffer thread"}, cfg);
    CHECK(fitted.dimension() == 2);
    CHECK(fitted.vocab.index.count("leak") == 1);
    CHECK(fitted.vocab.index.count("buffer") == 1);
    // Indices stay lexicographic after the cut.
    CHECK(fitted.vocab.index.at("buffer") == 0);
    CHECK(fitted.vocab.index.at("leak") == 1);
}

TEST_CASE("count transform conserves in-vocabulary token mass") {
    VectorizerConfig cfg;
    cfg.min_df = 1;
    std::vector<std::string> docs = {"leak buffer leak", "thread deadlock buffer",
                                     "race thread race leak"};
    auto fitted = fit_vectorizer(docs, cfg);
    for (const auto& doc : docs) {
        auto grams = extract_ngrams(preprocess(doc, stop()), cfg);
        double in_vocab = 0;
        for (const auto& g : grams) in_vocab += fitted.vocab.index.count(g);
        auto vec = fitted.transform(doc);
        vec.validate();
        double total = 0;
        for (const auto& [idx, value] : vec.entries) total += value;
        CHECK(total == doctest::Approx(in_vocab).epsilon(1e-12));
    }
    // Out-of-vocabulary terms are silently dropped.
    auto vec = fitted.transform("heisenbug quantum");
    CHECK(vec.entries.empty());
    CHECK(vec.dim == fitted.dimension());
}

TEST_CASE("tfidf matches the hand-computed example") {
    VectorizerConfig cfg;
    cfg.ngram_max = 1;
    cfg.min_df = 1;
    cfg.weighting = Weighting::tfidf;
    CHECK(cfg.l2());
    auto fitted = fit_vectorizer({"null pointer null", "null deadlock", "pointer deadlock"}, cfg);
    REQUIRE(fitted.dimension() == 3);
    // All three terms have df=2 with N=3, so idf is identical and the
    // normalized weights reduce to count / l2-norm of counts.
    auto vec = fitted.transform("null pointer null");
    REQUIRE(vec.entries.size() == 2);
    auto null_idx = fitted.vocab.index.at("null");
    auto ptr_idx = fitted.vocab.index.at("pointer");
    for (const auto& [idx, value] : vec.entries) {
        if (idx == null_idx) CHECK(value == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-12));
        else if (idx == ptr_idx) CHECK(value == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-12));
        else FAIL("unexpected index");
    }
}

TEST_CASE("tfidf idf weighting separates common from rare terms") {
    VectorizerConfig cfg;
    cfg.ngram_max = 1;
    cfg.min_df = 1;
    cfg.weighting = Weighting::tfidf;
    cfg.l2_normalize = false;
    auto fitted = fit_vectorizer({"leak race", "leak buffer", "leak thread", "leak"}, cfg);
    // idf(t) = ln((1+N)/(1+df)) + 1 with N=4.
    auto vec = fitted.transform("leak race");
    REQUIRE(vec.entries.size() == 2);
    double idf_leak = std::log(5.0 / 5.0) + 1.0;
    double idf_race = std::log(5.0 / 2.0) + 1.0;
    CHECK(vec.entries[fitted.vocab.index.at("leak") == vec.entries[0].first ? 0 : 1].second ==
          doctest::Approx(idf_leak).epsilon(1e-12));
    for (const auto& [idx, value] : vec.entries) {
        if (idx == fitted.vocab.index.at("race"))
            CHECK(value == doctest::Approx(idf_race).epsilon(1e-12));
    }
}

TEST_CASE("tfidf vectors are unit length when l2 is on") {
    VectorizerConfig cfg;
    cfg.min_df = 1;
    cfg.weighting = Weighting::tfidf;
    std::vector<std::string> docs = {"leak buffer overflow crash", "thread race deadlock",
                                     "buffer thread leak leak"};
    auto fitted = fit_vectorizer(docs, cfg);
    for (const auto& doc : docs) {
        auto vec = fitted.transform(doc);
        REQUIRE(!vec.entries.empty());
        CHECK(std::sqrt(vec.l2_norm_squared()) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("config validation rejects bad settings") {
    VectorizerConfig cfg;
    cfg.ngram_min = 2;
    cfg.ngram_max = 1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.min_df = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.max_features = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    CHECK_THROWS_AS(stopwords("no-such-list"), std::invalid_argument);
}
