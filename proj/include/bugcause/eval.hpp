// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "bugcause/corpus.hpp"
#include "bugcause/models.hpp"
#include "bugcause/textprep.hpp"

namespace bugcause {

// ---------------------------------------------------------------------------
// Text-level dataset: raw documents plus labels. Vectorizers are fitted on
// training portions only, so weighting can be grid-searched.

struct TextDataset {
    std::vector<std::string> docs;
    std::vector<int> y;
    std::vector<std::string> class_names;

    int n_classes() const { return static_cast<int>(class_names.size()); }
    std::size_t size() const { return docs.size(); }
};

TextDataset make_text_dataset(const std::vector<LabeledReport>& reports);

// ---------------------------------------------------------------------------
// Splitting

struct SplitResult {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

SplitResult stratified_split(const std::vector<int>& y, double test_fraction, std::uint64_t seed);
std::vector<std::vector<std::size_t>> stratified_kfold(const std::vector<int>& y, int k,
                                                       std::uint64_t seed);

// ---------------------------------------------------------------------------
// Metrics

using ConfusionMatrix = std::vector<std::vector<std::uint64_t>>; // rows = true class

ConfusionMatrix confusion_matrix(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                                 int n_classes);

struct MetricsReport {
    ConfusionMatrix matrix;
    std::vector<double> precision, recall, f1;
    std::vector<std::uint64_t> support;
    double weighted_precision = 0.0, weighted_recall = 0.0, weighted_f1 = 0.0;
    double accuracy = 0.0;
};

MetricsReport classification_metrics(const ConfusionMatrix& matrix);

struct Aggregate {
    double mean = 0.0, median = 0.0, stddev = 0.0, min = 0.0, max = 0.0;
};

Aggregate aggregate_runs(const std::vector<double>& scores);

// ---------------------------------------------------------------------------
// Pipelines and grid search

struct Grid {
    std::string kind; // mnb | lrc | lsvc | sgdc | rfc
    std::map<std::string, std::vector<nlohmann::json>> values;
};

Grid default_grid(const std::string& kind);
using Combination = std::map<std::string, nlohmann::json>;

// Deterministic lexicographic enumeration: names sorted, values in list order,
// rightmost name varying fastest.
std::vector<Combination> enumerate_combinations(const Grid& grid);

struct Pipeline {
    FittedVectorizer vectorizer;
    Model model;

    Prediction predict_doc(const std::string& doc) const {
        return predict(model, vectorizer.transform(doc));
    }
};

// Fits vectorizer and model on the selected rows of `ds`.
Pipeline train_pipeline(const std::string& kind, const Combination& combo, const TextDataset& ds,
                        const std::vector<std::size_t>& rows, std::uint64_t seed);

struct GridCell {
    Combination combo;
    double mean_accuracy = 0.0; // -inf when a training attempt failed
    std::string error;
};

struct GridSearchResult {
    Combination best;
    std::vector<GridCell> table;
};

GridSearchResult grid_search(const std::string& kind, const Grid& grid, const TextDataset& ds,
                             const std::vector<std::size_t>& train_rows, int k,
                             std::uint64_t seed);

// ---------------------------------------------------------------------------
// Repeated randomized experiment

struct ClassifierRuns {
    std::string kind;
    std::vector<MetricsReport> per_run;
    std::vector<Combination> chosen;
    Aggregate precision, recall, f1;
};

struct ExperimentReport {
    std::vector<ClassifierRuns> classifiers;
    std::vector<std::uint64_t> run_seeds;
    std::uint64_t master_seed = 0;
    int n_runs = 0;
};

struct ExperimentConfig {
    std::vector<Grid> grids;
    int n_runs = 100;
    double test_fraction = 0.2;
    int cv_folds = 5;
    std::uint64_t master_seed = 0;
};

ExperimentReport run_experiment(const TextDataset& ds, const ExperimentConfig& cfg);

enum class ReportFormat { csv, markdown };
std::string render_report(const ExperimentReport& report, ReportFormat format);
nlohmann::ordered_json experiment_report_to_json(const ExperimentReport& report);

} // namespace bugcause
