// SPDX-License-Identifier: Apache-2.0
#include "bugcause/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "bugcause/digest.hpp"
#include "bugcause/kernels.hpp"
#include "bugcause/rng.hpp"

namespace bugcause {

using ordered_json = nlohmann::ordered_json;

void Dataset::validate() const {
    if (X.size() != y.size()) throw std::invalid_argument("dataset: |X| != |y|");
    if (class_names.size() < 2) throw std::invalid_argument("dataset: need at least 2 classes");
    std::vector<bool> seen(class_names.size(), false);
    const std::uint32_t dim = dimension();
    for (std::size_t i = 0; i < X.size(); ++i) {
        if (X[i].dim != dim) throw std::invalid_argument("dataset: inconsistent dimensions");
        if (y[i] < 0 || y[i] >= n_classes()) throw std::invalid_argument("dataset: label out of range");
        seen[static_cast<std::size_t>(y[i])] = true;
    }
    for (std::size_t c = 0; c < seen.size(); ++c)
        if (!seen[c]) throw std::invalid_argument("dataset: class '" + class_names[c] + "' has no samples");
}

std::string_view to_string(LinearKind k) {
    switch (k) {
        case LinearKind::logreg: return "logreg";
        case LinearKind::svm_pegasos: return "svm_pegasos";
        case LinearKind::sgd_hinge: return "sgd_hinge";
    }
    return "?";
}

LinearKind linear_kind_from_string(std::string_view s) {
    if (s == "logreg") return LinearKind::logreg;
    if (s == "svm_pegasos") return LinearKind::svm_pegasos;
    if (s == "sgd_hinge") return LinearKind::sgd_hinge;
    throw std::invalid_argument("unknown linear kind: " + std::string(s));
}

std::string_view to_string(SgdSchedule s) {
    return s == SgdSchedule::constant ? "constant" : "inv_t";
}

SgdSchedule sgd_schedule_from_string(std::string_view s) {
    if (s == "constant") return SgdSchedule::constant;
    if (s == "inv_t") return SgdSchedule::inv_t;
    throw std::invalid_argument("unknown schedule: " + std::string(s));
}

namespace {

void softmax_inplace(std::vector<double>& z) {
    double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double& v : z) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (double& v : z) v /= sum;
}

int argmax_lowest(const std::vector<double>& scores) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(scores.size()); ++i)
        if (scores[static_cast<std::size_t>(i)] > scores[static_cast<std::size_t>(best)]) best = i;
    return best;
}

} // namespace

// ---------------------------------------------------------------------------
// Multinomial naive Bayes

Model train_mnb(const Dataset& ds, double alpha) {
    ds.validate();
    if (alpha <= 0.0) throw std::invalid_argument("mnb alpha must be > 0");
    const int C = ds.n_classes();
    const std::uint32_t d = ds.dimension();

    std::vector<double> class_counts(static_cast<std::size_t>(C), 0.0);
    std::vector<std::vector<double>> term_counts(
        static_cast<std::size_t>(C), std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < ds.X.size(); ++i) {
        auto c = static_cast<std::size_t>(ds.y[i]);
        class_counts[c] += 1.0;
        for (const auto& [idx, v] : ds.X[i].entries) {
            if (v < 0.0) throw std::invalid_argument("mnb requires non-negative features");
            term_counts[c][idx] += v;
        }
    }

    MnbParams p;
    p.alpha = alpha;
    p.log_priors.resize(static_cast<std::size_t>(C));
    p.log_likelihoods.assign(static_cast<std::size_t>(C), std::vector<double>(d, 0.0));
    const double n = double(ds.X.size());
    for (std::size_t c = 0; c < static_cast<std::size_t>(C); ++c) {
        p.log_priors[c] = std::log(class_counts[c] / n);
        double total = std::accumulate(term_counts[c].begin(), term_counts[c].end(), 0.0);
        double denom = std::log(total + alpha * double(d));
        for (std::uint32_t t = 0; t < d; ++t)
            p.log_likelihoods[c][t] = std::log(term_counts[c][t] + alpha) - denom;
    }
    return Model{"mnb", ds.class_names, std::move(p)};
}

// ---------------------------------------------------------------------------
// Logistic regression (multinomial softmax, L2, gradient descent)

namespace {

// Per-sample class probabilities under `params`.
std::vector<double> logreg_probs(const LinearParams& params, const SparseVector& x) {
    std::vector<double> z(params.bias);
    for (std::size_t c = 0; c < params.weights.size(); ++c)
        z[c] += kernels::sparse_dot(x.entries, params.weights[c]);
    softmax_inplace(z);
    return z;
}

} // namespace

double logreg_loss(const LinearParams& params, const Dataset& ds,
                   const std::vector<std::size_t>& batch, double lambda) {
    double loss = 0.0;
    for (std::size_t i : batch) {
        auto p = logreg_probs(params, ds.X[i]);
        loss -= std::log(std::max(p[static_cast<std::size_t>(ds.y[i])], 1e-300));
    }
    loss /= double(batch.size());
    double reg = 0.0;
    for (const auto& row : params.weights) reg += kernels::squared_norm(row);
    return loss + 0.5 * lambda * reg;
}

std::vector<double> logreg_gradient(const LinearParams& params, const Dataset& ds,
                                    const std::vector<std::size_t>& batch, double lambda) {
    const std::size_t C = params.weights.size();
    const std::size_t d = params.weights.empty() ? 0 : params.weights.front().size();
    std::vector<double> grad(C * d + C, 0.0);
    const double inv_m = 1.0 / double(batch.size());
    for (std::size_t i : batch) {
        auto p = logreg_probs(params, ds.X[i]);
        for (std::size_t c = 0; c < C; ++c) {
            double coef = (p[c] - (static_cast<std::size_t>(ds.y[i]) == c ? 1.0 : 0.0)) * inv_m;
            kernels::sparse_axpy(coef, ds.X[i].entries, std::span(grad.data() + c * d, d));
            grad[C * d + c] += coef;
        }
    }
    for (std::size_t c = 0; c < C; ++c)
        kernels::axpy(lambda, params.weights[c], std::span(grad.data() + c * d, d));
    return grad;
}

Model train_logreg(const Dataset& ds, const LogregOptions& opt) {
    ds.validate();
    if (opt.epochs < 1) throw std::invalid_argument("logreg epochs must be >= 1");
    const std::size_t C = static_cast<std::size_t>(ds.n_classes());
    const std::size_t d = ds.dimension();
    const std::size_t n = ds.X.size();

    LinearParams p;
    p.kind = LinearKind::logreg;
    p.weights.assign(C, std::vector<double>(d, 0.0));
    p.bias.assign(C, 0.0);
    p.lambda = opt.lambda;
    p.epochs = opt.epochs;
    p.seed = opt.seed;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(opt.seed);
    const std::size_t batch = opt.batch_size == 0 ? n : std::min(opt.batch_size, n);
    int last_good_epoch = 0;

    for (int epoch = 1; epoch <= opt.epochs; ++epoch) {
        if (batch < n) rng.shuffle(order);
        for (std::size_t start = 0; start < n; start += batch) {
            std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                         order.begin() +
                                             static_cast<std::ptrdiff_t>(std::min(start + batch, n)));
            auto grad = logreg_gradient(p, ds, idx, opt.lambda);
            for (std::size_t c = 0; c < C; ++c) {
                kernels::axpy(-opt.learning_rate, std::span(grad.data() + c * d, d),
                              p.weights[c]);
                p.bias[c] -= opt.learning_rate * grad[C * d + c];
            }
        }
        double loss = logreg_loss(p, ds, order, opt.lambda);
        if (!std::isfinite(loss))
            throw std::runtime_error("logreg: non-finite loss at epoch " + std::to_string(epoch) +
                                     "; last good epoch " + std::to_string(last_good_epoch) +
                                     " (reduce learning rate)");
        last_good_epoch = epoch;
    }
    return Model{"lrc", ds.class_names, std::move(p)};
}

// ---------------------------------------------------------------------------
// Pegasos linear SVM (one-vs-rest, averaged over the final half of steps)
//
// With step size 1/(lambda*t) the iterate has the closed form
// w_{t+1} = q_t / (lambda*t) where q accumulates y*x over margin violations.
// The running average over the window is kept lazily via prefix sums of the
// 1/(lambda*t) coefficients so every step stays O(nnz).

namespace {

struct BinaryProblem {
    std::vector<double> w; // averaged weights
    double b = 0.0;
};

BinaryProblem pegasos_binary(const Dataset& ds, const std::vector<int>& sign, double lambda,
                             int epochs, std::uint64_t seed) {
    const std::size_t d = ds.dimension();
    const std::size_t n = ds.X.size();
    const std::uint64_t total_steps = std::uint64_t(epochs) * n;
    const std::uint64_t window_start = total_steps / 2 + 1;

    std::vector<double> q(d, 0.0);
    double bias = 0.0;
    std::vector<double> u(d, 0.0); // lazy average correction
    double coef_prefix = 0.0;      // sum of 1/(lambda*t) over completed window steps
    double bias_sum = 0.0;
    std::uint64_t window_count = 0;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);

    std::uint64_t t = 0;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t i : order) {
            ++t;
            const double y = sign[i];
            double wx = t == 1 ? 0.0
                               : kernels::sparse_dot(ds.X[i].entries, q) / (lambda * double(t - 1));
            bool violated = y * (wx + bias) < 1.0;
            const bool in_window = t >= window_start;
            if (violated) {
                if (in_window) kernels::sparse_axpy(coef_prefix * y, ds.X[i].entries, u);
                kernels::sparse_axpy(y, ds.X[i].entries, q);
                bias += y / (lambda * double(t));
            }
            if (in_window) {
                coef_prefix += 1.0 / (lambda * double(t));
                bias_sum += bias;
                ++window_count;
            }
        }
    }

    BinaryProblem out;
    out.w.assign(q.begin(), q.end());
    kernels::scale(coef_prefix, out.w);
    // subtract the corrections for updates that arrived mid-window
    kernels::axpy(-1.0, u, out.w);
    kernels::scale(1.0 / double(window_count), out.w);
    out.b = bias_sum / double(window_count);
    return out;
}

} // namespace

Model train_linear_svm(const Dataset& ds, double lambda, int epochs, std::uint64_t seed) {
    ds.validate();
    if (lambda <= 0.0) throw std::invalid_argument("svm lambda must be > 0");
    if (epochs < 1) throw std::invalid_argument("svm epochs must be >= 1");
    const std::size_t C = static_cast<std::size_t>(ds.n_classes());

    LinearParams p;
    p.kind = LinearKind::svm_pegasos;
    p.lambda = lambda;
    p.epochs = epochs;
    p.seed = seed;
    p.weights.resize(C);
    p.bias.resize(C);
    for (std::size_t c = 0; c < C; ++c) {
        std::vector<int> sign(ds.y.size());
        for (std::size_t i = 0; i < ds.y.size(); ++i)
            sign[i] = static_cast<std::size_t>(ds.y[i]) == c ? 1 : -1;
        auto bin = pegasos_binary(ds, sign, lambda, epochs, derive_run_seed(seed, c));
        p.weights[c] = std::move(bin.w);
        p.bias[c] = bin.b;
    }
    return Model{"lsvc", ds.class_names, std::move(p)};
}

// ---------------------------------------------------------------------------
// Hinge-loss SGD (one-vs-rest, configurable schedule, no averaging)
//
// Weight decay is carried in a scale factor so updates stay O(nnz).

namespace {

BinaryProblem sgd_hinge_binary(const Dataset& ds, const std::vector<int>& sign,
                               const SgdHingeOptions& opt, std::uint64_t seed) {
    const std::size_t d = ds.dimension();
    const std::size_t n = ds.X.size();

    std::vector<double> v(d, 0.0);
    double s = 1.0;
    double bias = 0.0;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);

    std::uint64_t t = 0;
    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t i : order) {
            ++t;
            double eta = opt.schedule == SgdSchedule::constant
                             ? opt.learning_rate
                             : opt.learning_rate /
                                   (1.0 + opt.learning_rate * opt.lambda * double(t));
            double decay = 1.0 - eta * opt.lambda;
            if (decay <= 0.0)
                throw std::invalid_argument("sgd_hinge: learning_rate*lambda too large");
            const double y = sign[i];
            double margin = y * (s * kernels::sparse_dot(ds.X[i].entries, v) + bias);
            s *= decay;
            if (margin < 1.0) {
                kernels::sparse_axpy(eta * y / s, ds.X[i].entries, v);
                bias += eta * y;
            }
            if (s < 1e-100) { // fold the scale back in before it underflows
                kernels::scale(s, v);
                s = 1.0;
            }
        }
    }

    BinaryProblem out;
    out.w = std::move(v);
    kernels::scale(s, out.w);
    out.b = bias;
    return out;
}

} // namespace

Model train_sgd_hinge(const Dataset& ds, const SgdHingeOptions& opt) {
    ds.validate();
    if (opt.lambda <= 0.0) throw std::invalid_argument("sgd_hinge lambda must be > 0");
    if (opt.epochs < 1) throw std::invalid_argument("sgd_hinge epochs must be >= 1");
    const std::size_t C = static_cast<std::size_t>(ds.n_classes());

    LinearParams p;
    p.kind = LinearKind::sgd_hinge;
    p.lambda = opt.lambda;
    p.epochs = opt.epochs;
    p.seed = opt.seed;
    p.weights.resize(C);
    p.bias.resize(C);
    for (std::size_t c = 0; c < C; ++c) {
        std::vector<int> sign(ds.y.size());
        for (std::size_t i = 0; i < ds.y.size(); ++i)
            sign[i] = static_cast<std::size_t>(ds.y[i]) == c ? 1 : -1;
        auto bin = sgd_hinge_binary(ds, sign, opt, derive_run_seed(opt.seed, c));
        p.weights[c] = std::move(bin.w);
        p.bias[c] = bin.b;
    }
    return Model{"sgdc", ds.class_names, std::move(p)};
}

// ---------------------------------------------------------------------------
// Random forest

namespace {

struct ColumnMatrix {
    std::size_t n = 0;
    std::vector<std::vector<double>> cols; // dim x n

    static ColumnMatrix from(const Dataset& ds) {
        ColumnMatrix m;
        m.n = ds.X.size();
        m.cols.assign(ds.dimension(), std::vector<double>(m.n, 0.0));
        for (std::size_t i = 0; i < m.n; ++i)
            for (const auto& [idx, v] : ds.X[i].entries) m.cols[idx][i] = v;
        return m;
    }
};

struct TreeBuilder {
    const ColumnMatrix& cols;
    const std::vector<int>& y;
    int n_classes;
    const ForestOptions& opt;
    Rng rng;
    std::vector<TreeNode> nodes;

    std::vector<double> class_distribution(const std::vector<std::size_t>& samples) const {
        std::vector<double> dist(static_cast<std::size_t>(n_classes), 0.0);
        for (std::size_t i : samples) dist[static_cast<std::size_t>(y[i])] += 1.0;
        for (double& v : dist) v /= double(samples.size());
        return dist;
    }

    static double gini(const std::vector<std::size_t>& counts, std::size_t total) {
        if (total == 0) return 0.0;
        double g = 1.0;
        for (std::size_t c : counts) {
            double p = double(c) / double(total);
            g -= p * p;
        }
        return g;
    }

    bool pure(const std::vector<std::size_t>& samples) const {
        for (std::size_t i : samples)
            if (y[i] != y[samples.front()]) return false;
        return true;
    }

    std::int32_t build(std::vector<std::size_t>& samples, int depth) {
        auto node_id = static_cast<std::int32_t>(nodes.size());
        nodes.emplace_back();

        bool depth_exhausted = opt.max_depth && depth >= *opt.max_depth;
        if (samples.size() < 2 * static_cast<std::size_t>(opt.min_samples_leaf) ||
            depth_exhausted || pure(samples)) {
            nodes[static_cast<std::size_t>(node_id)].distribution = class_distribution(samples);
            return node_id;
        }

        const std::size_t d = cols.cols.size();
        auto mtry = static_cast<std::size_t>(std::floor(std::sqrt(double(d))));
        mtry = std::max<std::size_t>(1, std::min(mtry, d));

        // sample mtry distinct feature indices
        std::vector<std::uint32_t> features(d);
        std::iota(features.begin(), features.end(), 0u);
        for (std::size_t i = 0; i < mtry; ++i) {
            std::size_t j = i + static_cast<std::size_t>(rng.next_below(d - i));
            std::swap(features[i], features[j]);
        }
        features.resize(mtry);

        double parent_gini;
        {
            std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes), 0);
            for (std::size_t i : samples) ++counts[static_cast<std::size_t>(y[i])];
            parent_gini = gini(counts, samples.size());
        }

        double best_decrease = 0.0;
        std::int32_t best_feature = -1;
        double best_threshold = 0.0;

        std::vector<std::pair<double, int>> vals;
        for (std::uint32_t f : features) {
            const auto& col = cols.cols[f];
            vals.clear();
            for (std::size_t i : samples) vals.emplace_back(col[i], y[i]);
            std::sort(vals.begin(), vals.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            std::vector<std::size_t> left_counts(static_cast<std::size_t>(n_classes), 0);
            std::vector<std::size_t> right_counts(static_cast<std::size_t>(n_classes), 0);
            for (const auto& [v, cls] : vals) ++right_counts[static_cast<std::size_t>(cls)];

            for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
                ++left_counts[static_cast<std::size_t>(vals[i].second)];
                --right_counts[static_cast<std::size_t>(vals[i].second)];
                if (vals[i].first == vals[i + 1].first) continue;
                std::size_t nl = i + 1, nr = vals.size() - nl;
                if (nl < static_cast<std::size_t>(opt.min_samples_leaf) ||
                    nr < static_cast<std::size_t>(opt.min_samples_leaf))
                    continue;
                double decrease = parent_gini - (double(nl) * gini(left_counts, nl) +
                                                 double(nr) * gini(right_counts, nr)) /
                                                    double(vals.size());
                if (decrease > best_decrease + 1e-15) {
                    best_decrease = decrease;
                    best_feature = static_cast<std::int32_t>(f);
                    best_threshold = 0.5 * (vals[i].first + vals[i + 1].first);
                }
            }
        }

        if (best_feature < 0) {
            nodes[static_cast<std::size_t>(node_id)].distribution = class_distribution(samples);
            return node_id;
        }

        std::vector<std::size_t> left, right;
        const auto& col = cols.cols[static_cast<std::size_t>(best_feature)];
        for (std::size_t i : samples)
            (col[i] <= best_threshold ? left : right).push_back(i);

        nodes[static_cast<std::size_t>(node_id)].feature = best_feature;
        nodes[static_cast<std::size_t>(node_id)].threshold = best_threshold;
        auto l = build(left, depth + 1);
        auto r = build(right, depth + 1);
        nodes[static_cast<std::size_t>(node_id)].left = l;
        nodes[static_cast<std::size_t>(node_id)].right = r;
        return node_id;
    }
};

} // namespace

Model train_random_forest(const Dataset& ds, const ForestOptions& opt) {
    ds.validate();
    if (opt.n_trees < 1) throw std::invalid_argument("n_trees must be >= 1");
    if (opt.min_samples_leaf < 1) throw std::invalid_argument("min_samples_leaf must be >= 1");

    auto cols = ColumnMatrix::from(ds);
    ForestParams p;
    p.n_trees = opt.n_trees;
    p.max_depth = opt.max_depth;
    p.min_samples_leaf = opt.min_samples_leaf;
    p.seed = opt.seed;
    p.bootstrap = opt.bootstrap;

    const std::size_t n = ds.X.size();
    for (int tree = 0; tree < opt.n_trees; ++tree) {
        Rng rng(derive_run_seed(opt.seed, static_cast<std::uint64_t>(tree)));
        std::vector<std::size_t> samples;
        samples.reserve(n);
        if (opt.bootstrap) {
            for (std::size_t i = 0; i < n; ++i)
                samples.push_back(static_cast<std::size_t>(rng.next_below(n)));
        } else {
            samples.resize(n);
            std::iota(samples.begin(), samples.end(), 0);
        }
        TreeBuilder builder{cols, ds.y, ds.n_classes(), opt, std::move(rng), {}};
        builder.build(samples, 0);
        p.trees.push_back(std::move(builder.nodes));
    }
    return Model{"rfc", ds.class_names, std::move(p)};
}

// ---------------------------------------------------------------------------
// Prediction

namespace {

double sparse_at(const SparseVector& x, std::uint32_t idx) {
    auto it = std::lower_bound(x.entries.begin(), x.entries.end(), idx,
                               [](const auto& e, std::uint32_t i) { return e.first < i; });
    return (it != x.entries.end() && it->first == idx) ? it->second : 0.0;
}

} // namespace

Prediction predict(const Model& model, const SparseVector& x) {
    const std::size_t C = model.class_names.size();
    Prediction pred;
    pred.scores.assign(C, 0.0);

    if (const auto* mnb = std::get_if<MnbParams>(&model.params)) {
        if (!mnb->log_likelihoods.empty() && x.dim > mnb->log_likelihoods.front().size())
            throw std::invalid_argument("predict: input dimension exceeds model dimension");
        for (std::size_t c = 0; c < C; ++c) {
            double score = mnb->log_priors[c];
            for (const auto& [idx, v] : x.entries) score += v * mnb->log_likelihoods[c][idx];
            pred.scores[c] = score;
        }
        softmax_inplace(pred.scores);
    } else if (const auto* lin = std::get_if<LinearParams>(&model.params)) {
        if (!lin->weights.empty() && x.dim > lin->weights.front().size())
            throw std::invalid_argument("predict: input dimension exceeds model dimension");
        for (std::size_t c = 0; c < C; ++c)
            pred.scores[c] = kernels::sparse_dot(x.entries, lin->weights[c]) + lin->bias[c];
        if (lin->kind == LinearKind::logreg) softmax_inplace(pred.scores);
    } else {
        const auto& forest = std::get<ForestParams>(model.params);
        for (const auto& tree : forest.trees) {
            std::int32_t node = 0;
            while (tree[static_cast<std::size_t>(node)].feature >= 0) {
                const auto& nd = tree[static_cast<std::size_t>(node)];
                double v = sparse_at(x, static_cast<std::uint32_t>(nd.feature));
                node = v <= nd.threshold ? nd.left : nd.right;
            }
            const auto& dist = tree[static_cast<std::size_t>(node)].distribution;
            for (std::size_t c = 0; c < C; ++c) pred.scores[c] += dist[c];
        }
        for (double& v : pred.scores) v /= double(forest.trees.size());
    }

    pred.class_index = argmax_lowest(pred.scores);
    return pred;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

ordered_json vectorizer_to_json(const FittedVectorizer& fv) {
    ordered_json cfg;
    cfg["ngram_min"] = fv.cfg.ngram_min;
    cfg["ngram_max"] = fv.cfg.ngram_max;
    cfg["min_df"] = fv.cfg.min_df;
    if (fv.cfg.max_features) cfg["max_features"] = *fv.cfg.max_features;
    cfg["weighting"] = fv.cfg.weighting == Weighting::tfidf ? "tfidf" : "count";
    cfg["l2_normalize"] = fv.cfg.l2();

    std::vector<std::string> terms(fv.vocab.index.size());
    for (const auto& [term, idx] : fv.vocab.index) terms[idx] = term;

    ordered_json j;
    j["config"] = std::move(cfg);
    j["vocabulary"] = terms;
    j["df"] = fv.vocab.df;
    j["N"] = fv.vocab.fitted_docs;
    j["stopword_list_id"] = fv.cfg.stopword_list_id;
    return j;
}

FittedVectorizer vectorizer_from_json(const nlohmann::json& j) {
    FittedVectorizer fv;
    const auto& cfg = j.at("config");
    fv.cfg.ngram_min = cfg.at("ngram_min").get<int>();
    fv.cfg.ngram_max = cfg.at("ngram_max").get<int>();
    fv.cfg.min_df = cfg.at("min_df").get<int>();
    if (cfg.contains("max_features")) fv.cfg.max_features = cfg.at("max_features").get<std::size_t>();
    fv.cfg.weighting = cfg.at("weighting") == "tfidf" ? Weighting::tfidf : Weighting::count;
    fv.cfg.l2_normalize = cfg.at("l2_normalize").get<bool>();
    fv.cfg.stopword_list_id = j.at("stopword_list_id").get<std::string>();

    auto terms = j.at("vocabulary").get<std::vector<std::string>>();
    fv.vocab.df = j.at("df").get<std::vector<std::uint32_t>>();
    fv.vocab.fitted_docs = j.at("N").get<std::uint64_t>();
    for (std::uint32_t i = 0; i < terms.size(); ++i) fv.vocab.index.emplace(terms[i], i);
    return fv;
}

ordered_json params_to_json(const Model& model) {
    ordered_json j;
    if (const auto* mnb = std::get_if<MnbParams>(&model.params)) {
        j["alpha"] = mnb->alpha;
        j["log_priors"] = mnb->log_priors;
        j["log_likelihoods"] = mnb->log_likelihoods;
    } else if (const auto* lin = std::get_if<LinearParams>(&model.params)) {
        j["linear_kind"] = std::string(to_string(lin->kind));
        j["weights"] = lin->weights;
        j["bias"] = lin->bias;
        j["lambda"] = lin->lambda;
        j["epochs"] = lin->epochs;
        j["seed"] = lin->seed;
    } else {
        const auto& forest = std::get<ForestParams>(model.params);
        j["n_trees"] = forest.n_trees;
        if (forest.max_depth) j["max_depth"] = *forest.max_depth;
        j["min_samples_leaf"] = forest.min_samples_leaf;
        j["seed"] = forest.seed;
        j["bootstrap"] = forest.bootstrap;
        auto trees = ordered_json::array();
        for (const auto& tree : forest.trees) {
            auto jt = ordered_json::array();
            for (const auto& nd : tree) {
                ordered_json jn;
                jn["feature"] = nd.feature;
                jn["threshold"] = nd.threshold;
                jn["left"] = nd.left;
                jn["right"] = nd.right;
                if (nd.feature < 0) jn["distribution"] = nd.distribution;
                jt.push_back(std::move(jn));
            }
            trees.push_back(std::move(jt));
        }
        j["trees"] = std::move(trees);
    }
    return j;
}

void params_from_json(const nlohmann::json& j, Model& model) {
    if (model.kind == "mnb") {
        MnbParams p;
        p.alpha = j.at("alpha").get<double>();
        p.log_priors = j.at("log_priors").get<std::vector<double>>();
        p.log_likelihoods = j.at("log_likelihoods").get<std::vector<std::vector<double>>>();
        model.params = std::move(p);
    } else if (model.kind == "rfc") {
        ForestParams p;
        p.n_trees = j.at("n_trees").get<int>();
        if (j.contains("max_depth")) p.max_depth = j.at("max_depth").get<int>();
        p.min_samples_leaf = j.at("min_samples_leaf").get<int>();
        p.seed = j.at("seed").get<std::uint64_t>();
        p.bootstrap = j.value("bootstrap", true);
        for (const auto& jt : j.at("trees")) {
            std::vector<TreeNode> tree;
            for (const auto& jn : jt) {
                TreeNode nd;
                nd.feature = jn.at("feature").get<std::int32_t>();
                nd.threshold = jn.at("threshold").get<double>();
                nd.left = jn.at("left").get<std::int32_t>();
                nd.right = jn.at("right").get<std::int32_t>();
                if (nd.feature < 0)
                    nd.distribution = jn.at("distribution").get<std::vector<double>>();
                tree.push_back(std::move(nd));
            }
            p.trees.push_back(std::move(tree));
        }
        model.params = std::move(p);
    } else {
        LinearParams p;
        p.kind = linear_kind_from_string(j.at("linear_kind").get<std::string>());
        p.weights = j.at("weights").get<std::vector<std::vector<double>>>();
        p.bias = j.at("bias").get<std::vector<double>>();
        p.lambda = j.at("lambda").get<double>();
        p.epochs = j.at("epochs").get<int>();
        p.seed = j.at("seed").get<std::uint64_t>();
        model.params = std::move(p);
    }
}

constexpr int kFormatVersion = 1;

} // namespace

void save_model(const Model& model, const FittedVectorizer& fv, const std::string& path) {
    ordered_json j;
    j["format_version"] = kFormatVersion;
    j["model_kind"] = model.kind;
    j["class_names"] = model.class_names;
    j["vectorizer"] = vectorizer_to_json(fv);
    j["parameters"] = params_to_json(model);
    j["checksum"] = sha256_hex(j.dump());

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open model file for writing: " + path);
    out << j.dump(2) << '\n';
    out.flush();
    if (!out) throw std::runtime_error("write failure: " + path);
}

std::pair<Model, FittedVectorizer> load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const std::exception& e) {
        throw std::runtime_error("model file corrupt (parse failure): " + std::string(e.what()));
    }

    int version = j.at("format_version").get<int>();
    if (version != kFormatVersion)
        throw std::runtime_error("model format version mismatch: file has " +
                                 std::to_string(version) + ", this build expects " +
                                 std::to_string(kFormatVersion));

    std::string stored = j.at("checksum").get<std::string>();
    j.erase("checksum");
    if (sha256_hex(j.dump()) != stored)
        throw std::runtime_error("model file checksum mismatch: " + path);

    Model model;
    model.kind = j.at("model_kind").get<std::string>();
    model.class_names = j.at("class_names").get<std::vector<std::string>>();
    params_from_json(j.at("parameters"), model);
    auto fv = vectorizer_from_json(j.at("vectorizer"));
    return {std::move(model), std::move(fv)};
}

} // namespace bugcause
