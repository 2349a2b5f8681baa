// SPDX-License-Identifier: Apache-2.0
#include "bugcause/textprep.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

#include "bugcause/kernels.hpp"
#include "bugcause/porter.hpp"

#ifndef BUGCAUSE_DATA_DIR
#define BUGCAUSE_DATA_DIR "."
#endif

namespace bugcause {

namespace {

std::filesystem::path stopword_file(const std::string& id) {
    std::string fname = id + ".txt";
    if (const char* env = std::getenv("BUGCAUSE_DATA_DIR")) {
        auto p = std::filesystem::path(env) / fname;
        if (std::filesystem::exists(p)) return p;
    }
    auto p = std::filesystem::path(BUGCAUSE_DATA_DIR) / fname;
    if (std::filesystem::exists(p)) return p;
    throw std::invalid_argument("stop-word list not found for id '" + id +
                             "' (set BUGCAUSE_DATA_DIR)");
}

} // namespace

const StopwordSet& stopwords(const std::string& id) {
    static std::mutex mu;
    static std::unordered_map<std::string, StopwordSet> cache;
    std::lock_guard lock(mu);
    auto it = cache.find(id);
    if (it != cache.end()) return it->second;

    StopwordSet set;
    std::ifstream in(stopword_file(id));
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (!line.empty()) set.insert(line);
    }
    return cache.emplace(id, std::move(set)).first->second;
}

void VectorizerConfig::validate() const {
    if (ngram_min < 1 || ngram_min > ngram_max || ngram_max > 2)
        throw std::invalid_argument("ngram range must satisfy 1 <= min <= max <= 2");
    if (min_df < 1) throw std::invalid_argument("min_df must be >= 1");
    if (max_features && *max_features == 0)
        throw std::invalid_argument("max_features must be >= 1 when set");
}

std::vector<std::string> preprocess(std::string_view text, const StopwordSet& stoplist) {
    std::vector<std::string> out;
    std::string tok;
    auto flush = [&] {
        if (tok.empty()) return;
        bool keep = tok.size() > 1;
        if (keep) {
            bool all_digit = std::all_of(tok.begin(), tok.end(),
                                         [](unsigned char c) { return std::isdigit(c); });
            keep = !all_digit && !stoplist.contains(tok);
        }
        if (keep) out.push_back(porter_stem(tok));
        tok.clear();
    };
    for (unsigned char c : text) {
        if (std::isalnum(c)) tok.push_back(static_cast<char>(std::tolower(c)));
        else flush();
    }
    flush();
    return out;
}

std::vector<std::string> extract_ngrams(const std::vector<std::string>& tokens,
                                        const VectorizerConfig& cfg) {
    std::vector<std::string> terms;
    if (cfg.ngram_min == 1) terms = tokens;
    if (cfg.ngram_max == 2) {
        for (std::size_t i = 0; i + 1 < tokens.size(); ++i)
            terms.push_back(tokens[i] + "_" + tokens[i + 1]);
    }
    return terms;
}

FittedVectorizer fit_vectorizer(const std::vector<std::string>& docs,
                                const VectorizerConfig& cfg) {
    cfg.validate();
    if (docs.empty()) throw std::invalid_argument("fit_vectorizer: no documents");

    const auto& stoplist = stopwords(cfg.stopword_list_id);
    std::map<std::string, std::uint32_t> df;
    for (const auto& doc : docs) {
        auto terms = extract_ngrams(preprocess(doc, stoplist), cfg);
        std::sort(terms.begin(), terms.end());
        terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
        for (auto& t : terms) ++df[t];
    }

    std::vector<std::pair<std::string, std::uint32_t>> kept;
    for (auto& [term, count] : df)
        if (count >= static_cast<std::uint32_t>(cfg.min_df)) kept.emplace_back(term, count);

    if (cfg.max_features && kept.size() > *cfg.max_features) {
        std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        kept.resize(*cfg.max_features);
        std::sort(kept.begin(), kept.end()); // back to lexicographic for indexing
    }

    if (kept.empty())
        throw std::runtime_error(
            "vocabulary empty after pruning; lower min_df or add documents");

    FittedVectorizer fv;
    fv.cfg = cfg;
    fv.vocab.fitted_docs = docs.size();
    fv.vocab.df.reserve(kept.size());
    for (std::uint32_t i = 0; i < kept.size(); ++i) {
        fv.vocab.index.emplace(kept[i].first, i);
        fv.vocab.df.push_back(kept[i].second);
    }
    return fv;
}

SparseVector FittedVectorizer::transform(std::string_view doc) const {
    const auto& stoplist = stopwords(cfg.stopword_list_id);
    auto terms = extract_ngrams(preprocess(doc, stoplist), cfg);

    std::map<std::uint32_t, double> counts;
    for (const auto& t : terms) {
        auto it = vocab.index.find(t);
        if (it != vocab.index.end()) counts[it->second] += 1.0;
    }

    SparseVector v;
    v.dim = dimension();
    v.entries.reserve(counts.size());
    for (auto& [idx, c] : counts) {
        double val = c;
        if (cfg.weighting == Weighting::tfidf) {
            double idf = std::log((1.0 + double(vocab.fitted_docs)) / (1.0 + double(vocab.df[idx]))) + 1.0;
            val = c * idf;
        }
        v.entries.emplace_back(idx, val);
    }
    if (cfg.l2()) {
        double n2 = v.l2_norm_squared();
        if (n2 > 0.0) {
            double inv = 1.0 / std::sqrt(n2);
            for (auto& [idx, val] : v.entries) val *= inv;
        }
    }
    return v;
}

} // namespace bugcause
