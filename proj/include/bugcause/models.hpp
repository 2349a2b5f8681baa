// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bugcause/sparse.hpp"
#include "bugcause/textprep.hpp"

namespace bugcause {

struct Dataset {
    std::vector<SparseVector> X;
    std::vector<int> y; // class indices 0..C-1
    std::vector<std::string> class_names;

    int n_classes() const { return static_cast<int>(class_names.size()); }
    std::uint32_t dimension() const { return X.empty() ? 0 : X.front().dim; }
    void validate() const;
};

// ---------------------------------------------------------------------------
// Parameter families

struct MnbParams {
    double alpha = 1.0;
    std::vector<double> log_priors;                   // per class
    std::vector<std::vector<double>> log_likelihoods; // class x term
};

enum class LinearKind { logreg, svm_pegasos, sgd_hinge };
std::string_view to_string(LinearKind k);
LinearKind linear_kind_from_string(std::string_view s);

struct LinearParams {
    LinearKind kind = LinearKind::logreg;
    std::vector<std::vector<double>> weights; // class x dimension
    std::vector<double> bias;                 // per class
    double lambda = 0.0;
    int epochs = 0;
    std::uint64_t seed = 0;
};

struct TreeNode {
    std::int32_t feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::vector<double> distribution; // leaves only; sums to 1
};

struct ForestParams {
    int n_trees = 0;
    std::optional<int> max_depth;
    int min_samples_leaf = 1;
    std::uint64_t seed = 0;
    bool bootstrap = true; // test hook; production training always bootstraps
    std::vector<std::vector<TreeNode>> trees;
};

struct Model {
    std::string kind; // mnb | lrc | lsvc | sgdc | rfc
    std::vector<std::string> class_names;
    std::variant<MnbParams, LinearParams, ForestParams> params;
};

struct Prediction {
    int class_index = 0;
    std::vector<double> scores; // probabilities, or raw margins for hinge kinds
};

// ---------------------------------------------------------------------------
// Training

Model train_mnb(const Dataset& ds, double alpha = 1.0);

struct LogregOptions {
    double lambda = 1e-3;
    double learning_rate = 0.1;
    int epochs = 200;
    std::size_t batch_size = 0; // 0 = full batch
    std::uint64_t seed = 0;
};
Model train_logreg(const Dataset& ds, const LogregOptions& opt);

// Flat analytic gradient [W row-major, then bias] of the regularized
// softmax cross-entropy loss at `params`, over the given sample indices.
std::vector<double> logreg_gradient(const LinearParams& params, const Dataset& ds,
                                    const std::vector<std::size_t>& batch, double lambda);
double logreg_loss(const LinearParams& params, const Dataset& ds,
                   const std::vector<std::size_t>& batch, double lambda);

Model train_linear_svm(const Dataset& ds, double lambda, int epochs, std::uint64_t seed);

enum class SgdSchedule { constant, inv_t };
std::string_view to_string(SgdSchedule s);
SgdSchedule sgd_schedule_from_string(std::string_view s);

struct SgdHingeOptions {
    double lambda = 1e-3;
    double learning_rate = 0.1;
    SgdSchedule schedule = SgdSchedule::constant;
    int epochs = 50;
    std::uint64_t seed = 0;
};
Model train_sgd_hinge(const Dataset& ds, const SgdHingeOptions& opt);

struct ForestOptions {
    int n_trees = 100;
    std::optional<int> max_depth;
    int min_samples_leaf = 1;
    std::uint64_t seed = 0;
    bool bootstrap = true;
};
Model train_random_forest(const Dataset& ds, const ForestOptions& opt);

// ---------------------------------------------------------------------------
// Prediction and persistence

Prediction predict(const Model& model, const SparseVector& x);

void save_model(const Model& model, const FittedVectorizer& fv, const std::string& path);
std::pair<Model, FittedVectorizer> load_model(const std::string& path);

} // namespace bugcause
