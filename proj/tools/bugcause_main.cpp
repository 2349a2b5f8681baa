// SPDX-License-Identifier: Apache-2.0
//
// bugcause: mine bug-report corpora from issue trackers and train/evaluate
// root-cause classifiers (semantic / memory / concurrency).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bugcause/corpus.hpp"
#include "bugcause/eval.hpp"
#include "bugcause/github.hpp"
#include "bugcause/models.hpp"
#include "bugcause/textprep.hpp"

namespace {

using namespace bugcause;

std::vector<LabeledReport> join_reports(const std::vector<IssueRecord>& issues,
                                        const std::vector<LabeledIssueRow>& labels,
                                        std::uint64_t* missing = nullptr) {
    std::map<std::pair<std::string, std::int64_t>, const IssueRecord*> by_key;
    for (const auto& issue : issues) by_key[{issue.repo, issue.issue_id}] = &issue;
    std::vector<LabeledReport> out;
    std::uint64_t miss = 0;
    for (const auto& row : labels) {
        auto it = by_key.find({row.repo, row.issue_id});
        if (it == by_key.end()) {
            ++miss;
            continue;
        }
        out.push_back({*it->second, row.label, row.source});
    }
    if (missing) *missing = miss;
    return out;
}

int cmd_fetch(const std::string& repo_arg, const std::string& out_path,
              const std::string& cache_dir, const std::string& base_url, int page_size,
              const std::vector<std::string>& label_substrings, bool skip_commits) {
    auto slash = repo_arg.find('/');
    if (slash == std::string::npos)
        throw std::invalid_argument("repository must be given as owner/name");
    RepoRef repo{repo_arg.substr(0, slash), repo_arg.substr(slash + 1)};

    ApiConfig cfg;
    cfg.base_url = base_url;
    cfg.page_size = page_size;
    cfg.cache_dir = cache_dir;
    if (const char* token = std::getenv("ISSUE_API_TOKEN")) cfg.auth_token = token;

    GithubClient client(cfg, make_httplib_transport());
    auto issues = client.fetch_closed_bug_issues(repo, label_substrings);
    if (!skip_commits)
        for (auto& issue : issues)
            issue.commits = client.fetch_linked_commits(repo, issue.issue_id);
    auto written = write_dump(issues, out_path);
    std::cerr << "fetched " << written << " issues from " << repo.full() << " ("
              << client.network_requests() << " requests)\n";
    return 0;
}

int cmd_filter(const std::string& in_path, const std::string& out_path,
               const std::string& report_path, const FilterConfig& cfg) {
    auto dump = load_dump(in_path);
    for (const auto& w : dump.warnings) std::cerr << "warning: " << w << '\n';
    if (dump.skipped > 0) std::cerr << "skipped " << dump.skipped << " malformed lines\n";

    auto [accepted, report] = filter_corpus(dump.records, cfg);
    write_dump(accepted, out_path);

    nlohmann::ordered_json j;
    j["input"] = report.input;
    j["accepted"] = report.accepted;
    j["not_bug"] = report.not_bug;
    auto rejected = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < report.rejected_by_reason.size(); ++i)
        rejected[std::string(to_string(static_cast<RejectReason>(i)))] =
            report.rejected_by_reason[i];
    j["rejected"] = std::move(rejected);
    std::ofstream out(report_path, std::ios::trunc);
    out << j.dump(2) << '\n';

    std::cerr << "accepted " << report.accepted << " of " << report.input << " issues\n";
    return 0;
}

int cmd_scan_keywords(const std::string& in_path, const std::string& keywords_path,
                      const std::string& out_path) {
    auto dump = load_dump(in_path);
    auto keywords = keywords_path.empty() ? default_keywords() : load_keywords(keywords_path);
    auto candidates = keyword_scan(dump.records, keywords);

    std::ofstream out(out_path, std::ios::trunc);
    out << "repo,issue_id,matched_class,matched_keywords\n";
    for (const auto& e : candidates.entries) {
        out << e.repo << ',' << e.issue_id << ',' << to_string(e.matched_class) << ',';
        for (std::size_t i = 0; i < e.matched_keywords.size(); ++i)
            out << (i ? ";" : "") << e.matched_keywords[i];
        out << '\n';
    }
    std::cerr << candidates.entries.size() << " candidate entries\n";
    return 0;
}

int cmd_compose(const std::string& labels_path, const std::string& in_path, std::uint64_t seed,
                const std::string& out_path, int min_confidence, double cap) {
    auto dump = load_dump(in_path);
    auto labels = load_labels(labels_path);
    std::uint64_t missing = 0;
    auto reports = join_reports(dump.records, labels, &missing);
    if (missing > 0) std::cerr << "warning: " << missing << " labels without a matching issue\n";

    auto composed = compose_training_set(reports, min_confidence, cap, seed);
    std::vector<IssueRecord> issues;
    for (const auto& r : composed) issues.push_back(r.issue);
    write_dump(issues, out_path);

    auto stats = corpus_stats(composed);
    std::cerr << "composed " << stats.total << " reports:";
    for (const auto& [cls, n] : stats.per_class) std::cerr << ' ' << cls << '=' << n;
    std::cerr << '\n';
    return 0;
}

int cmd_train(const std::string& in_path, const std::string& labels_path,
              const std::string& kind, const std::string& out_path, std::uint64_t seed,
              const std::string& weighting, std::optional<double> lambda,
              std::optional<int> epochs, std::optional<double> alpha,
              std::optional<double> learning_rate) {
    auto dump = load_dump(in_path);
    auto labels = load_labels(labels_path);
    auto reports = join_reports(dump.records, labels);
    if (reports.empty()) throw std::runtime_error("no labeled reports to train on");
    auto ds = make_text_dataset(reports);

    Combination combo;
    combo["weighting"] = weighting;
    if (lambda) combo["lambda"] = *lambda;
    if (epochs) combo["epochs"] = *epochs;
    if (alpha) combo["alpha"] = *alpha;
    if (learning_rate) combo["learning_rate"] = *learning_rate;

    std::vector<std::size_t> rows(ds.size());
    std::iota(rows.begin(), rows.end(), 0);
    auto pipe = train_pipeline(kind, combo, ds, rows, seed);
    save_model(pipe.model, pipe.vectorizer, out_path);
    std::cerr << "trained " << kind << " on " << ds.size() << " reports ("
              << pipe.vectorizer.dimension() << " features) -> " << out_path << '\n';
    return 0;
}

int cmd_predict(const std::string& model_path, std::optional<std::string> text,
                std::optional<std::string> file, bool pretty) {
    auto [model, fv] = load_model(model_path);
    std::string doc;
    if (text) {
        doc = *text;
    } else if (file) {
        std::ifstream in(*file);
        if (!in) throw std::runtime_error("cannot open report file: " + *file);
        std::stringstream ss;
        ss << in.rdbuf();
        doc = ss.str();
    } else {
        std::stringstream ss;
        ss << std::cin.rdbuf();
        doc = ss.str();
    }

    auto pred = predict(model, fv.transform(doc));
    if (pretty) {
        std::cout << "predicted: " << model.class_names[static_cast<std::size_t>(pred.class_index)]
                  << '\n';
        for (std::size_t c = 0; c < model.class_names.size(); ++c)
            std::cout << "  " << model.class_names[c] << ": " << pred.scores[c] << '\n';
    } else {
        std::cout << model.class_names[static_cast<std::size_t>(pred.class_index)];
        for (double s : pred.scores) std::cout << '\t' << s;
        std::cout << '\n';
    }
    return 0;
}

int cmd_experiment(const std::string& config_path, const std::string& out_dir) {
    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot open experiment config: " + config_path);
    auto j = nlohmann::json::parse(in);

    auto dump = load_dump(j.at("reports").get<std::string>());
    auto labels = load_labels(j.at("labels").get<std::string>());
    auto reports = join_reports(dump.records, labels);
    if (reports.empty()) throw std::runtime_error("no labeled reports in experiment inputs");
    auto ds = make_text_dataset(reports);

    ExperimentConfig cfg;
    cfg.n_runs = j.value("n_runs", 100);
    cfg.master_seed = j.value("master_seed", std::uint64_t{0});
    cfg.test_fraction = j.value("test_fraction", 0.2);
    cfg.cv_folds = j.value("cv_folds", 5);

    if (j.contains("grids") && j["grids"].is_object()) {
        for (const auto& [kind, jg] : j["grids"].items()) {
            Grid g = default_grid(kind); // validates the kind
            if (jg.is_object()) {
                g.values.clear();
                for (const auto& [name, vals] : jg.items())
                    g.values[name] = vals.get<std::vector<nlohmann::json>>();
            }
            cfg.grids.push_back(std::move(g));
        }
    } else {
        for (const char* kind : {"mnb", "lrc", "sgdc", "lsvc", "rfc"})
            cfg.grids.push_back(default_grid(kind));
    }

    auto report = run_experiment(ds, cfg);

    std::filesystem::create_directories(out_dir);
    auto write = [&](const std::string& name, const std::string& content) {
        std::ofstream out(std::filesystem::path(out_dir) / name, std::ios::trunc);
        out << content;
    };
    write("report.csv", render_report(report, ReportFormat::csv));
    write("report.md", render_report(report, ReportFormat::markdown));
    write("report.json", experiment_report_to_json(report).dump(2) + "\n");
    std::cerr << "experiment complete: " << cfg.n_runs << " runs, reports in " << out_dir << '\n';
    std::cout << render_report(report, ReportFormat::markdown);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"bug-report mining and root-cause classification toolkit"};
    app.require_subcommand(1);

    // fetch
    std::string repo_arg, out_path, cache_dir = "cache", base_url = "https://api.github.com";
    int page_size = 100;
    std::vector<std::string> label_substrings = {"bug", "defect", "regression"};
    bool skip_commits = false;
    auto* fetch = app.add_subcommand("fetch", "fetch closed bug issues from an issue tracker");
    fetch->add_option("repo", repo_arg, "repository as owner/name")->required();
    fetch->add_option("--out", out_path, "output dump file (.jsonl)")->required();
    fetch->add_option("--cache-dir", cache_dir, "response cache directory");
    fetch->add_option("--base-url", base_url, "API base URL");
    fetch->add_option("--page-size", page_size, "page size (1-100)");
    fetch->add_option("--label-substr", label_substrings, "bug label substrings");
    fetch->add_flag("--skip-commits", skip_commits, "do not fetch linked commits");

    // filter
    std::string in_path, report_path;
    FilterConfig fcfg;
    auto* filter = app.add_subcommand("filter", "apply the corpus filtering heuristics");
    filter->add_option("--in", in_path)->required();
    filter->add_option("--out", out_path)->required();
    filter->add_option("--report", report_path)->required();
    filter->add_option("--max-commits", fcfg.max_commits_per_issue, "exclusive bound");
    filter->add_option("--max-files", fcfg.max_files_per_commit, "exclusive bound");
    filter->add_option("--max-lines", fcfg.max_lines_per_commit, "exclusive bound");
    filter->add_option("--label-substr", fcfg.bug_label_substrings);
    filter->add_option("--production-suffix", fcfg.production_code_suffix);

    // scan-keywords
    std::string keywords_path;
    auto* scan = app.add_subcommand("scan-keywords", "keyword bootstrap over commit messages");
    scan->add_option("--in", in_path)->required();
    scan->add_option("--keywords", keywords_path, "keyword config JSON (default: built-in)");
    scan->add_option("--out", out_path)->required();

    // compose
    std::string labels_path;
    std::uint64_t seed = 0;
    int min_confidence = 8;
    double cap = 0.05;
    auto* compose = app.add_subcommand("compose", "compose the training set");
    compose->add_option("--labels", labels_path)->required();
    compose->add_option("--in", in_path)->required();
    compose->add_option("--seed", seed);
    compose->add_option("--out", out_path)->required();
    compose->add_option("--min-confidence", min_confidence);
    compose->add_option("--cap", cap, "semantic keyword-source cap (fraction)");

    // train
    std::string model_kind = "lsvc", weighting = "count";
    std::optional<double> lambda, alpha, learning_rate;
    std::optional<int> epochs;
    auto* train = app.add_subcommand("train", "train a classifier");
    train->add_option("--in", in_path)->required();
    train->add_option("--labels", labels_path)->required();
    train->add_option("--model-kind", model_kind)
        ->check(CLI::IsMember({"mnb", "lrc", "lsvc", "sgdc", "rfc"}));
    train->add_option("--out", out_path)->required();
    train->add_option("--seed", seed);
    train->add_option("--weighting", weighting)->check(CLI::IsMember({"count", "tfidf"}));
    double lambda_v = 0, alpha_v = 0, lr_v = 0;
    int epochs_v = 0;
    auto* lambda_opt = train->add_option("--lambda", lambda_v, "L2 strength");
    auto* epochs_opt = train->add_option("--epochs", epochs_v);
    auto* alpha_opt = train->add_option("--alpha", alpha_v, "MNB smoothing");
    auto* lr_opt = train->add_option("--learning-rate", lr_v);

    // predict
    std::string model_path;
    std::optional<std::string> text, file;
    bool pretty = false;
    auto* predict_cmd = app.add_subcommand("predict", "predict the root cause of a report");
    predict_cmd->add_option("--model", model_path)->required();
    auto* text_opt = predict_cmd->add_option("--text", text, "report text inline");
    auto* file_opt = predict_cmd->add_option("--file", file, "report text file (default: stdin)");
    text_opt->excludes(file_opt);
    predict_cmd->add_flag("--pretty", pretty, "human-readable output");

    // experiment
    std::string config_path, exp_out_dir;
    auto* experiment = app.add_subcommand("experiment", "repeated randomized-split experiment");
    experiment->add_option("--config", config_path)->required();
    experiment->add_option("--out", exp_out_dir)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*fetch)
            return cmd_fetch(repo_arg, out_path, cache_dir, base_url, page_size, label_substrings,
                             skip_commits);
        if (*filter) return cmd_filter(in_path, out_path, report_path, fcfg);
        if (*scan) return cmd_scan_keywords(in_path, keywords_path, out_path);
        if (*compose) return cmd_compose(labels_path, in_path, seed, out_path, min_confidence, cap);
        if (*train) {
            if (lambda_opt->count()) lambda = lambda_v;
            if (epochs_opt->count()) epochs = epochs_v;
            if (alpha_opt->count()) alpha = alpha_v;
            if (lr_opt->count()) learning_rate = lr_v;
            return cmd_train(in_path, labels_path, model_kind, out_path, seed, weighting, lambda,
                             epochs, alpha, learning_rate);
        }
        if (*predict_cmd) return cmd_predict(model_path, text, file, pretty);
        if (*experiment) return cmd_experiment(config_path, exp_out_dir);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 1;
}
