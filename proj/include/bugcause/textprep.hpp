// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "bugcause/sparse.hpp"

namespace bugcause {

using StopwordSet = std::set<std::string, std::less<>>;

// Loads the stop-word list for `id` ("stopwords-v1" ships with the tool).
// Search order: $BUGCAUSE_DATA_DIR, then the build-time data directory.
const StopwordSet& stopwords(const std::string& id);

enum class Weighting { count, tfidf };

struct VectorizerConfig {
    int ngram_min = 1;
    int ngram_max = 2;
    int min_df = 2;
    std::optional<std::size_t> max_features;
    Weighting weighting = Weighting::count;
    std::optional<bool> l2_normalize; // default: true for tfidf, false for count
    std::string stopword_list_id = "stopwords-v1";

    bool l2() const { return l2_normalize.value_or(weighting == Weighting::tfidf); }
    void validate() const;
};

// Lowercase tokens after case folding, splitting, length/digit pruning,
// stop-word removal, and Porter stemming.
std::vector<std::string> preprocess(std::string_view text, const StopwordSet& stoplist);

// Unigrams in order, then adjacent bigrams joined with "_". Adjacency is
// measured on the preprocessed stream, after stop words are gone.
std::vector<std::string> extract_ngrams(const std::vector<std::string>& tokens,
                                        const VectorizerConfig& cfg);

struct Vocabulary {
    std::map<std::string, std::uint32_t> index; // dense 0..|V|-1, lexicographic
    std::vector<std::uint32_t> df;              // by index
    std::uint64_t fitted_docs = 0;              // N
};

struct FittedVectorizer {
    VectorizerConfig cfg;
    Vocabulary vocab;

    std::uint32_t dimension() const { return static_cast<std::uint32_t>(vocab.index.size()); }
    SparseVector transform(std::string_view doc) const;
};

FittedVectorizer fit_vectorizer(const std::vector<std::string>& docs,
                                const VectorizerConfig& cfg);

} // namespace bugcause
