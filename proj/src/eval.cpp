// SPDX-License-Identifier: Apache-2.0
#include "bugcause/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "bugcause/digest.hpp"
#include "bugcause/rng.hpp"

namespace bugcause {

// ---------------------------------------------------------------------------
// Dataset construction

TextDataset make_text_dataset(const std::vector<LabeledReport>& reports) {
    TextDataset ds;
    ds.class_names = {"concurrency", "memory", "semantic"};
    auto class_index = [&](MainCategory c) {
        switch (c) {
            case MainCategory::concurrency: return 0;
            case MainCategory::memory: return 1;
            case MainCategory::semantic: return 2;
        }
        return 2;
    };
    for (const auto& r : reports) {
        ds.docs.push_back(r.issue.title + "\n" + r.issue.body);
        ds.y.push_back(class_index(r.label.main));
    }
    return ds;
}

// ---------------------------------------------------------------------------
// Splitting

namespace {

std::vector<std::vector<std::size_t>> indices_by_class(const std::vector<int>& y, int C) {
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(C));
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] < 0 || y[i] >= C) throw std::invalid_argument("label out of range");
        by_class[static_cast<std::size_t>(y[i])].push_back(i);
    }
    return by_class;
}

int infer_classes(const std::vector<int>& y) {
    int C = 0;
    for (int v : y) C = std::max(C, v + 1);
    return C;
}

} // namespace

SplitResult stratified_split(const std::vector<int>& y, double test_fraction, std::uint64_t seed) {
    if (y.empty()) throw std::invalid_argument("stratified_split: empty labels");
    if (test_fraction <= 0.0 || test_fraction >= 1.0)
        throw std::invalid_argument("test_fraction must be in (0,1)");
    const int C = infer_classes(y);
    auto by_class = indices_by_class(y, C);
    for (int c = 0; c < C; ++c)
        if (by_class[static_cast<std::size_t>(c)].size() < 2)
            throw std::invalid_argument("class " + std::to_string(c) +
                                        " has fewer than 2 samples");

    const auto target_total =
        static_cast<std::size_t>(std::llround(double(y.size()) * test_fraction));

    // floor allocation, then largest-remainder correction up to the target
    std::vector<std::size_t> take(static_cast<std::size_t>(C));
    std::vector<std::pair<double, int>> remainders;
    std::size_t allocated = 0;
    for (int c = 0; c < C; ++c) {
        double exact = double(by_class[static_cast<std::size_t>(c)].size()) * test_fraction;
        take[static_cast<std::size_t>(c)] = static_cast<std::size_t>(std::floor(exact));
        allocated += take[static_cast<std::size_t>(c)];
        remainders.emplace_back(exact - std::floor(exact), c);
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (auto& [rem, c] : remainders) {
        if (allocated >= target_total) break;
        if (take[static_cast<std::size_t>(c)] < by_class[static_cast<std::size_t>(c)].size()) {
            ++take[static_cast<std::size_t>(c)];
            ++allocated;
        }
    }

    SplitResult result;
    for (int c = 0; c < C; ++c) {
        auto& members = by_class[static_cast<std::size_t>(c)];
        Rng rng(derive_run_seed(seed, static_cast<std::uint64_t>(c)));
        rng.shuffle(members);
        for (std::size_t i = 0; i < members.size(); ++i)
            (i < take[static_cast<std::size_t>(c)] ? result.test : result.train)
                .push_back(members[i]);
    }
    std::sort(result.train.begin(), result.train.end());
    std::sort(result.test.begin(), result.test.end());
    return result;
}

std::vector<std::vector<std::size_t>> stratified_kfold(const std::vector<int>& y, int k,
                                                       std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("k must be >= 2");
    const int C = infer_classes(y);
    auto by_class = indices_by_class(y, C);
    for (int c = 0; c < C; ++c)
        if (by_class[static_cast<std::size_t>(c)].size() < static_cast<std::size_t>(k))
            throw std::invalid_argument("class " + std::to_string(c) + " has fewer than " +
                                        std::to_string(k) + " samples");

    std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
    for (int c = 0; c < C; ++c) {
        auto& members = by_class[static_cast<std::size_t>(c)];
        Rng rng(derive_run_seed(seed, static_cast<std::uint64_t>(c)));
        rng.shuffle(members);
        // rotate the starting fold per class so leftovers spread out
        for (std::size_t i = 0; i < members.size(); ++i)
            folds[(i + static_cast<std::size_t>(c)) % static_cast<std::size_t>(k)].push_back(
                members[i]);
    }
    for (auto& fold : folds) std::sort(fold.begin(), fold.end());
    return folds;
}

// ---------------------------------------------------------------------------
// Metrics

ConfusionMatrix confusion_matrix(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                                 int n_classes) {
    if (y_true.size() != y_pred.size())
        throw std::invalid_argument("confusion_matrix: length mismatch");
    ConfusionMatrix m(static_cast<std::size_t>(n_classes),
                      std::vector<std::uint64_t>(static_cast<std::size_t>(n_classes), 0));
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] < 0 || y_true[i] >= n_classes || y_pred[i] < 0 || y_pred[i] >= n_classes)
            throw std::invalid_argument("confusion_matrix: label out of range");
        ++m[static_cast<std::size_t>(y_true[i])][static_cast<std::size_t>(y_pred[i])];
    }
    return m;
}

MetricsReport classification_metrics(const ConfusionMatrix& matrix) {
    const std::size_t C = matrix.size();
    MetricsReport r;
    r.matrix = matrix;
    r.precision.assign(C, 0.0);
    r.recall.assign(C, 0.0);
    r.f1.assign(C, 0.0);
    r.support.assign(C, 0);

    std::uint64_t total = 0, trace = 0;
    std::vector<std::uint64_t> col_sums(C, 0);
    for (std::size_t i = 0; i < C; ++i) {
        for (std::size_t j = 0; j < C; ++j) {
            r.support[i] += matrix[i][j];
            col_sums[j] += matrix[i][j];
            total += matrix[i][j];
        }
        trace += matrix[i][i];
    }
    if (total == 0) throw std::invalid_argument("classification_metrics: empty matrix");

    for (std::size_t c = 0; c < C; ++c) {
        const double tp = double(matrix[c][c]);
        r.precision[c] = col_sums[c] == 0 ? 0.0 : tp / double(col_sums[c]);
        r.recall[c] = r.support[c] == 0 ? 0.0 : tp / double(r.support[c]);
        double pr = r.precision[c] + r.recall[c];
        r.f1[c] = pr == 0.0 ? 0.0 : 2.0 * r.precision[c] * r.recall[c] / pr;
        const double weight = double(r.support[c]) / double(total);
        r.weighted_precision += weight * r.precision[c];
        r.weighted_recall += weight * r.recall[c];
        r.weighted_f1 += weight * r.f1[c];
    }
    r.accuracy = double(trace) / double(total);
    return r;
}

Aggregate aggregate_runs(const std::vector<double>& scores) {
    if (scores.empty()) throw std::invalid_argument("aggregate_runs: no scores");
    Aggregate a;
    std::vector<double> sorted = scores;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    a.min = sorted.front();
    a.max = sorted.back();
    a.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / double(n);
    a.median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    if (n > 1) {
        double ss = 0.0;
        for (double v : sorted) ss += (v - a.mean) * (v - a.mean);
        a.stddev = std::sqrt(ss / double(n - 1));
    }
    return a;
}

// ---------------------------------------------------------------------------
// Grids and pipelines

Grid default_grid(const std::string& kind) {
    Grid g;
    g.kind = kind;
    std::vector<nlohmann::json> weighting = {"count", "tfidf"};
    if (kind == "mnb") {
        g.values["alpha"] = {0.1, 0.5, 1.0};
        g.values["weighting"] = {"count"}; // counts required
    } else if (kind == "lrc" || kind == "lsvc") {
        g.values["lambda"] = {1e-4, 1e-3, 1e-2};
        g.values["epochs"] = {50, 200};
        g.values["weighting"] = weighting;
    } else if (kind == "sgdc") {
        g.values["lambda"] = {1e-4, 1e-3, 1e-2};
        g.values["epochs"] = {50, 200};
        g.values["schedule"] = {"constant", "inv_t"};
        g.values["weighting"] = weighting;
    } else if (kind == "rfc") {
        g.values["n_trees"] = {100};
        g.values["max_depth"] = {nullptr, 32};
        g.values["weighting"] = weighting;
    } else {
        throw std::invalid_argument("unknown classifier kind: " + kind);
    }
    return g;
}

std::vector<Combination> enumerate_combinations(const Grid& grid) {
    if (grid.values.empty()) throw std::invalid_argument("grid has no hyperparameters");
    std::vector<std::string> names;
    for (const auto& [name, vals] : grid.values) {
        if (vals.empty()) throw std::invalid_argument("empty value list for " + name);
        names.push_back(name);
    }
    std::vector<Combination> combos;
    std::vector<std::size_t> odo(names.size(), 0);
    for (;;) {
        Combination combo;
        for (std::size_t i = 0; i < names.size(); ++i)
            combo[names[i]] = grid.values.at(names[i])[odo[i]];
        combos.push_back(std::move(combo));
        std::size_t pos = names.size();
        while (pos > 0) {
            --pos;
            if (++odo[pos] < grid.values.at(names[pos]).size()) break;
            odo[pos] = 0;
            if (pos == 0) return combos;
        }
    }
}

namespace {

template <typename T>
T combo_get(const Combination& combo, const std::string& name, T fallback) {
    auto it = combo.find(name);
    if (it == combo.end() || it->second.is_null()) return fallback;
    return it->second.get<T>();
}

} // namespace

Pipeline train_pipeline(const std::string& kind, const Combination& combo, const TextDataset& ds,
                        const std::vector<std::size_t>& rows, std::uint64_t seed) {
    VectorizerConfig vcfg;
    vcfg.weighting =
        combo_get<std::string>(combo, "weighting", "count") == "tfidf" ? Weighting::tfidf
                                                                       : Weighting::count;
    std::vector<std::string> docs;
    docs.reserve(rows.size());
    for (std::size_t i : rows) docs.push_back(ds.docs[i]);

    Pipeline pipe;
    pipe.vectorizer = fit_vectorizer(docs, vcfg);

    Dataset train;
    train.class_names = ds.class_names;
    for (std::size_t i : rows) {
        train.X.push_back(pipe.vectorizer.transform(ds.docs[i]));
        train.y.push_back(ds.y[i]);
    }

    if (kind == "mnb") {
        pipe.model = train_mnb(train, combo_get<double>(combo, "alpha", 1.0));
    } else if (kind == "lrc") {
        LogregOptions opt;
        opt.lambda = combo_get<double>(combo, "lambda", 1e-3);
        opt.learning_rate = combo_get<double>(combo, "learning_rate", 0.5);
        opt.epochs = combo_get<int>(combo, "epochs", 200);
        opt.seed = seed;
        pipe.model = train_logreg(train, opt);
    } else if (kind == "lsvc") {
        pipe.model = train_linear_svm(train, combo_get<double>(combo, "lambda", 1e-3),
                                      combo_get<int>(combo, "epochs", 100), seed);
    } else if (kind == "sgdc") {
        SgdHingeOptions opt;
        opt.lambda = combo_get<double>(combo, "lambda", 1e-3);
        opt.learning_rate = combo_get<double>(combo, "learning_rate", 0.1);
        opt.schedule =
            sgd_schedule_from_string(combo_get<std::string>(combo, "schedule", "constant"));
        opt.epochs = combo_get<int>(combo, "epochs", 50);
        opt.seed = seed;
        pipe.model = train_sgd_hinge(train, opt);
    } else if (kind == "rfc") {
        ForestOptions opt;
        opt.n_trees = combo_get<int>(combo, "n_trees", 100);
        auto it = combo.find("max_depth");
        if (it != combo.end() && !it->second.is_null()) opt.max_depth = it->second.get<int>();
        opt.min_samples_leaf = combo_get<int>(combo, "min_samples_leaf", 1);
        opt.seed = seed;
        pipe.model = train_random_forest(train, opt);
    } else {
        throw std::invalid_argument("unknown classifier kind: " + kind);
    }
    return pipe;
}

// ---------------------------------------------------------------------------
// Grid search

GridSearchResult grid_search(const std::string& kind, const Grid& grid, const TextDataset& ds,
                             const std::vector<std::size_t>& train_rows, int k,
                             std::uint64_t seed) {
    auto combos = enumerate_combinations(grid);

    std::vector<int> y_sub;
    y_sub.reserve(train_rows.size());
    for (std::size_t i : train_rows) y_sub.push_back(ds.y[i]);
    auto folds = stratified_kfold(y_sub, k, derive_run_seed(seed, 0));

    GridSearchResult result;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t ci = 0; ci < combos.size(); ++ci) {
        GridCell cell;
        cell.combo = combos[ci];
        try {
            double acc_sum = 0.0;
            for (std::size_t f = 0; f < folds.size(); ++f) {
                std::vector<std::size_t> fit_rows, val_rows;
                std::vector<bool> in_fold(train_rows.size(), false);
                for (std::size_t local : folds[f]) in_fold[local] = true;
                for (std::size_t local = 0; local < train_rows.size(); ++local)
                    (in_fold[local] ? val_rows : fit_rows).push_back(train_rows[local]);

                auto pipe = train_pipeline(kind, combos[ci], ds, fit_rows,
                                           derive_run_seed(derive_run_seed(seed, ci + 1), f));
                std::size_t correct = 0;
                for (std::size_t row : val_rows)
                    if (pipe.predict_doc(ds.docs[row]).class_index == ds.y[row]) ++correct;
                acc_sum += double(correct) / double(val_rows.size());
            }
            cell.mean_accuracy = acc_sum / double(folds.size());
        } catch (const std::exception& e) {
            cell.mean_accuracy = -std::numeric_limits<double>::infinity();
            cell.error = e.what();
        }
        if (cell.mean_accuracy > best_score) {
            best_score = cell.mean_accuracy;
            result.best = cell.combo;
        }
        result.table.push_back(std::move(cell));
    }
    if (!std::isfinite(best_score))
        throw std::runtime_error("grid_search: every combination failed for " + kind);
    return result;
}

// ---------------------------------------------------------------------------
// Experiment

ExperimentReport run_experiment(const TextDataset& ds, const ExperimentConfig& cfg) {
    if (cfg.n_runs < 1) throw std::invalid_argument("n_runs must be >= 1");
    ExperimentReport report;
    report.master_seed = cfg.master_seed;
    report.n_runs = cfg.n_runs;
    for (const auto& grid : cfg.grids)
        report.classifiers.push_back(ClassifierRuns{grid.kind, {}, {}, {}, {}, {}});

    for (int run = 0; run < cfg.n_runs; ++run) {
        const std::uint64_t run_seed =
            derive_run_seed(cfg.master_seed, static_cast<std::uint64_t>(run));
        report.run_seeds.push_back(run_seed);
        try {
            auto split = stratified_split(ds.y, cfg.test_fraction, run_seed);
            for (std::size_t g = 0; g < cfg.grids.size(); ++g) {
                const auto& grid = cfg.grids[g];
                auto gs = grid_search(grid.kind, grid, ds, split.train, cfg.cv_folds,
                                      derive_run_seed(run_seed, 100 + g));
                auto pipe = train_pipeline(grid.kind, gs.best, ds, split.train,
                                           derive_run_seed(run_seed, 200 + g));
                std::vector<int> y_true, y_pred;
                for (std::size_t row : split.test) {
                    y_true.push_back(ds.y[row]);
                    y_pred.push_back(pipe.predict_doc(ds.docs[row]).class_index);
                }
                auto metrics =
                    classification_metrics(confusion_matrix(y_true, y_pred, ds.n_classes()));
                report.classifiers[g].per_run.push_back(std::move(metrics));
                report.classifiers[g].chosen.push_back(gs.best);
            }
        } catch (const std::exception& e) {
            throw std::runtime_error("experiment run " + std::to_string(run) +
                                     " failed: " + e.what());
        }
    }

    for (auto& cls : report.classifiers) {
        std::vector<double> p, r, f;
        for (const auto& m : cls.per_run) {
            p.push_back(m.weighted_precision);
            r.push_back(m.weighted_recall);
            f.push_back(m.weighted_f1);
        }
        cls.precision = aggregate_runs(p);
        cls.recall = aggregate_runs(r);
        cls.f1 = aggregate_runs(f);
    }
    return report;
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

std::string full_precision(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fixed4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

} // namespace

std::string render_report(const ExperimentReport& report, ReportFormat format) {
    std::ostringstream out;
    struct Row {
        const char* metric;
        const Aggregate ClassifierRuns::*agg;
    };
    static const Row rows[] = {{"precision", &ClassifierRuns::precision},
                               {"recall", &ClassifierRuns::recall},
                               {"f1", &ClassifierRuns::f1}};

    if (format == ReportFormat::csv) {
        out << "kind,metric,mean,median,std,min,max\n";
        for (const auto& cls : report.classifiers)
            for (const auto& row : rows) {
                const auto& a = cls.*(row.agg);
                out << cls.kind << ',' << row.metric << ',' << full_precision(a.mean) << ','
                    << full_precision(a.median) << ',' << full_precision(a.stddev) << ','
                    << full_precision(a.min) << ',' << full_precision(a.max) << '\n';
            }
    } else {
        out << "| kind | metric | mean | median | std | min | max |\n";
        out << "|------|--------|------|--------|-----|-----|-----|\n";
        for (const auto& cls : report.classifiers)
            for (const auto& row : rows) {
                const auto& a = cls.*(row.agg);
                out << "| " << cls.kind << " | " << row.metric << " | " << fixed4(a.mean) << " | "
                    << fixed4(a.median) << " | " << fixed4(a.stddev) << " | " << fixed4(a.min)
                    << " | " << fixed4(a.max) << " |\n";
            }
    }
    return out.str();
}

nlohmann::ordered_json experiment_report_to_json(const ExperimentReport& report) {
    nlohmann::ordered_json j;
    j["master_seed"] = report.master_seed;
    j["n_runs"] = report.n_runs;
    j["run_seeds"] = report.run_seeds;
    auto classifiers = nlohmann::ordered_json::array();
    for (const auto& cls : report.classifiers) {
        nlohmann::ordered_json jc;
        jc["kind"] = cls.kind;
        auto aggs = nlohmann::ordered_json::object();
        auto agg_json = [](const Aggregate& a) {
            return nlohmann::ordered_json{{"mean", a.mean},
                                          {"median", a.median},
                                          {"std", a.stddev},
                                          {"min", a.min},
                                          {"max", a.max}};
        };
        aggs["precision"] = agg_json(cls.precision);
        aggs["recall"] = agg_json(cls.recall);
        aggs["f1"] = agg_json(cls.f1);
        jc["aggregates"] = std::move(aggs);
        auto runs = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < cls.per_run.size(); ++i) {
            const auto& m = cls.per_run[i];
            nlohmann::ordered_json jr;
            jr["weighted_precision"] = m.weighted_precision;
            jr["weighted_recall"] = m.weighted_recall;
            jr["weighted_f1"] = m.weighted_f1;
            jr["accuracy"] = m.accuracy;
            jr["confusion_matrix"] = m.matrix;
            jr["chosen"] = cls.chosen[i];
            runs.push_back(std::move(jr));
        }
        jc["runs"] = std::move(runs);
        classifiers.push_back(std::move(jc));
    }
    j["classifiers"] = std::move(classifiers);
    return j;
}

} // namespace bugcause
