// SPDX-License-Identifier: Apache-2.0
#include "bugcause/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

#include "bugcause/rng.hpp"

namespace bugcause {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
}

bool contains_ci(std::string_view haystack, std::string_view needle) {
    return lower(haystack).find(lower(needle)) != std::string::npos;
}

bool is_hex40(std::string_view s) {
    if (s.size() != 40) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isdigit(c) || (c >= 'a' && c <= 'f');
    });
}

} // namespace

// ---------------------------------------------------------------------------
// Validation

void CommitRecord::validate() const {
    if (!is_hex40(sha)) throw std::invalid_argument("commit sha must be 40 lowercase hex chars");
}

void IssueRecord::validate() const {
    if (repo.empty() || repo.find('/') == std::string::npos)
        throw std::invalid_argument("repo must be owner/name");
    if (issue_id <= 0) throw std::invalid_argument("issue_id must be positive");
    if (!closed_at.empty() && !created_at.empty() && closed_at < created_at)
        throw std::invalid_argument("closed_at precedes created_at");
    for (const auto& c : commits) c.validate();
}

void FilterConfig::validate() const {
    if (max_commits_per_issue == 0 || max_files_per_commit == 0 || max_lines_per_commit == 0)
        throw std::invalid_argument("filter bounds must be positive");
    if (bug_label_substrings.empty())
        throw std::invalid_argument("bug label substring list must be non-empty");
}

// ---------------------------------------------------------------------------
// Labels

std::string_view to_string(MainCategory c) {
    switch (c) {
        case MainCategory::semantic: return "semantic";
        case MainCategory::memory: return "memory";
        case MainCategory::concurrency: return "concurrency";
    }
    return "?";
}

MainCategory main_category_from_string(std::string_view s) {
    if (s == "semantic") return MainCategory::semantic;
    if (s == "memory") return MainCategory::memory;
    if (s == "concurrency") return MainCategory::concurrency;
    throw std::invalid_argument("unknown main category: " + std::string(s));
}

const std::vector<std::string>& sub_categories(MainCategory c) {
    static const std::vector<std::string> semantic = {
        "exception_handling", "missing_case", "processing", "typo", "dependency", "other"};
    static const std::vector<std::string> memory = {
        "buffer_overflow", "null_pointer_deref", "uninit_memory_read",
        "memory_leak",     "dangling_pointer",   "double_free",
        "other"};
    static const std::vector<std::string> concurrency = {
        "order_violation", "race_condition", "atomic_violation", "deadlock", "other"};
    switch (c) {
        case MainCategory::semantic: return semantic;
        case MainCategory::memory: return memory;
        case MainCategory::concurrency: return concurrency;
    }
    return semantic;
}

void RootCauseLabel::validate() const {
    const auto& subs = sub_categories(main);
    if (std::find(subs.begin(), subs.end(), sub) == subs.end())
        throw std::invalid_argument("sub-category '" + sub + "' not valid for main category '" +
                                    std::string(to_string(main)) + "'");
    if (confidence < 1 || confidence > 10)
        throw std::invalid_argument("confidence must be in [1,10]");
}

std::string_view to_string(LabelSource s) {
    return s == LabelSource::random_sample ? "random_sample" : "keyword_search";
}

LabelSource label_source_from_string(std::string_view s) {
    if (s == "random_sample") return LabelSource::random_sample;
    if (s == "keyword_search") return LabelSource::keyword_search;
    throw std::invalid_argument("unknown label source: " + std::string(s));
}

// ---------------------------------------------------------------------------
// Filtering

std::string_view to_string(RejectReason r) {
    switch (r) {
        case RejectReason::no_commits: return "no_commits";
        case RejectReason::multi_issue_commit: return "multi_issue_commit";
        case RejectReason::too_many_commits: return "too_many_commits";
        case RejectReason::too_many_files: return "too_many_files";
        case RejectReason::too_many_lines: return "too_many_lines";
        case RejectReason::no_production_code: return "no_production_code";
    }
    return "?";
}

bool is_bug_issue(const IssueRecord& issue, const FilterConfig& cfg) {
    if (issue.state != IssueState::closed) return false;
    for (const auto& label : issue.labels)
        for (const auto& sub : cfg.bug_label_substrings)
            if (contains_ci(label, sub)) return true;
    return false;
}

namespace {

bool touches_production_code(const CommitRecord& c, const FilterConfig& cfg) {
    for (const auto& f : c.files) {
        if (!f.path.ends_with(cfg.production_code_suffix)) continue;
        bool test_file = false;
        for (const auto& marker : cfg.test_path_markers)
            if (f.path.find(marker) != std::string::npos) { test_file = true; break; }
        if (!test_file) return true;
    }
    return false;
}

} // namespace

FilterDecision apply_filters(const IssueRecord& issue, const FilterConfig& cfg) {
    auto reject = [](RejectReason r) { return FilterDecision{false, r}; };

    bool any_unavailable = std::any_of(issue.commits.begin(), issue.commits.end(),
                                       [](const CommitRecord& c) { return c.unavailable; });
    if (issue.commits.empty() || any_unavailable) return reject(RejectReason::no_commits);

    for (const auto& c : issue.commits)
        if (c.linked_issue_ids.size() > 1) return reject(RejectReason::multi_issue_commit);

    if (issue.commits.size() >= cfg.max_commits_per_issue)
        return reject(RejectReason::too_many_commits);

    for (const auto& c : issue.commits)
        if (c.files.size() >= cfg.max_files_per_commit) return reject(RejectReason::too_many_files);

    for (const auto& c : issue.commits) {
        std::uint64_t lines = 0;
        for (const auto& f : c.files) lines += f.insertions + f.deletions;
        if (lines >= cfg.max_lines_per_commit) return reject(RejectReason::too_many_lines);
    }

    bool production = std::any_of(issue.commits.begin(), issue.commits.end(),
                                  [&](const CommitRecord& c) { return touches_production_code(c, cfg); });
    if (!production) return reject(RejectReason::no_production_code);

    return FilterDecision{true, std::nullopt};
}

std::pair<std::vector<IssueRecord>, FilterReport>
filter_corpus(const std::vector<IssueRecord>& issues, const FilterConfig& cfg) {
    cfg.validate();
    FilterReport report;
    report.input = issues.size();
    std::vector<IssueRecord> accepted;
    for (const auto& issue : issues) {
        if (!is_bug_issue(issue, cfg)) {
            ++report.not_bug;
            continue;
        }
        auto decision = apply_filters(issue, cfg);
        if (decision.accepted) {
            accepted.push_back(issue);
            ++report.accepted;
        } else {
            ++report.rejected_by_reason[static_cast<std::size_t>(*decision.reason)];
        }
    }
    return {std::move(accepted), report};
}

// ---------------------------------------------------------------------------
// Keyword bootstrap

std::string_view to_string(KeywordClass c) {
    return c == KeywordClass::memory ? "memory" : "concurrency";
}

KeywordMap default_keywords() {
    return {
        {KeywordClass::memory,
         {"leak", "null pointer", "npe", "out of memory", "oom", "overflow", "dangling",
          "double free", "uninitialized"}},
        {KeywordClass::concurrency,
         {"race", "deadlock", "synchroniz", "concurren", "atomic", "thread-safe", "livelock"}},
    };
}

KeywordMap load_keywords(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open keyword config: " + path);
    auto j = nlohmann::json::parse(in);
    KeywordMap map;
    map[KeywordClass::memory] = j.at("memory").get<std::vector<std::string>>();
    map[KeywordClass::concurrency] = j.at("concurrency").get<std::vector<std::string>>();
    for (const auto& [cls, list] : map)
        if (list.empty()) throw std::runtime_error("keyword list must be non-empty");
    return map;
}

CandidateSet keyword_scan(const std::vector<IssueRecord>& issues, const KeywordMap& keywords) {
    for (const auto& [cls, list] : keywords)
        if (list.empty()) throw std::invalid_argument("keyword list must be non-empty");

    CandidateSet set;
    for (const auto& issue : issues) {
        for (const auto& [cls, list] : keywords) {
            std::vector<std::string> matched;
            for (const auto& kw : list) {
                bool hit = std::any_of(issue.commits.begin(), issue.commits.end(),
                                       [&](const CommitRecord& c) {
                                           return contains_ci(c.message, kw);
                                       });
                if (hit) matched.push_back(kw);
            }
            if (!matched.empty())
                set.entries.push_back({issue.repo, issue.issue_id, std::move(matched), cls});
        }
    }
    return set;
}

// ---------------------------------------------------------------------------
// Dump I/O

std::string issue_to_json_line(const IssueRecord& rec) {
    ordered_json j;
    j["repo"] = rec.repo;
    j["issue_id"] = rec.issue_id;
    j["title"] = rec.title;
    j["body"] = rec.body;
    j["labels"] = rec.labels;
    j["state"] = rec.state == IssueState::closed ? "closed" : "open";
    j["created_at"] = rec.created_at;
    j["closed_at"] = rec.closed_at;
    j["reporter"] = rec.reporter;
    auto commits = ordered_json::array();
    for (const auto& c : rec.commits) {
        ordered_json jc;
        jc["sha"] = c.sha;
        jc["message"] = c.message;
        auto files = ordered_json::array();
        for (const auto& f : c.files)
            files.push_back({{"path", f.path},
                             {"insertions", f.insertions},
                             {"deletions", f.deletions}});
        jc["files"] = std::move(files);
        jc["linked_issue_ids"] = c.linked_issue_ids;
        if (c.unavailable) jc["unavailable"] = true;
        commits.push_back(std::move(jc));
    }
    j["commits"] = std::move(commits);
    return j.dump();
}

IssueRecord issue_from_json_line(const std::string& line) {
    auto j = nlohmann::json::parse(line);
    IssueRecord rec;
    rec.repo = j.at("repo").get<std::string>();
    rec.issue_id = j.at("issue_id").get<std::int64_t>();
    rec.title = j.value("title", "");
    rec.body = j.value("body", "");
    rec.labels = j.value("labels", std::vector<std::string>{});
    std::string state = j.value("state", "open");
    if (state != "open" && state != "closed")
        throw std::invalid_argument("bad state: " + state);
    rec.state = state == "closed" ? IssueState::closed : IssueState::open;
    rec.created_at = j.value("created_at", "");
    rec.closed_at = j.value("closed_at", "");
    rec.reporter = j.value("reporter", "");
    for (const auto& jc : j.value("commits", nlohmann::json::array())) {
        CommitRecord c;
        c.sha = jc.at("sha").get<std::string>();
        c.message = jc.value("message", "");
        for (const auto& jf : jc.value("files", nlohmann::json::array()))
            c.files.push_back({jf.at("path").get<std::string>(),
                               jf.at("insertions").get<std::uint32_t>(),
                               jf.at("deletions").get<std::uint32_t>()});
        c.linked_issue_ids = jc.value("linked_issue_ids", std::vector<std::int64_t>{});
        c.unavailable = jc.value("unavailable", false);
        rec.commits.push_back(std::move(c));
    }
    rec.validate();
    return rec;
}

DumpStats load_dump(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dump file: " + path);
    DumpStats stats;
    std::string line;
    std::uint64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            stats.records.push_back(issue_from_json_line(line));
        } catch (const std::exception& e) {
            ++stats.skipped;
            stats.warnings.push_back("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return stats;
}

std::uint64_t write_dump(const std::vector<IssueRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open dump file for writing: " + path);
    for (const auto& rec : records) out << issue_to_json_line(rec) << '\n';
    out.flush();
    if (!out) throw std::runtime_error("write failure: " + path);
    return records.size();
}

// ---------------------------------------------------------------------------
// Label file I/O

std::vector<LabeledIssueRow> load_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open label file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty label file: " + path);
    while (!line.empty() && (line.back() == '\r')) line.pop_back();
    if (line != "repo,issue_id,main,sub,confidence,source")
        throw std::runtime_error("unexpected label file header: " + line);

    std::vector<LabeledIssueRow> rows;
    std::set<std::pair<std::string, std::int64_t>> seen;
    std::uint64_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        while (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 6)
            throw std::runtime_error("label row " + std::to_string(lineno) +
                                     ": expected 6 fields, got " + std::to_string(fields.size()));
        LabeledIssueRow row;
        row.repo = fields[0];
        try {
            row.issue_id = std::stoll(fields[1]);
            row.label.main = main_category_from_string(fields[2]);
            row.label.sub = fields[3];
            row.label.confidence = std::stoi(fields[4]);
            row.source = label_source_from_string(fields[5]);
            row.label.validate();
        } catch (const std::exception& e) {
            throw std::runtime_error("label row " + std::to_string(lineno) + ": " + e.what());
        }
        if (!seen.insert({row.repo, row.issue_id}).second)
            throw std::runtime_error("label row " + std::to_string(lineno) + ": duplicate " +
                                     row.repo + "#" + std::to_string(row.issue_id));
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_labels(const std::vector<LabeledIssueRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open label file for writing: " + path);
    out << "repo,issue_id,main,sub,confidence,source\n";
    for (const auto& r : rows)
        out << r.repo << ',' << r.issue_id << ',' << to_string(r.label.main) << ',' << r.label.sub
            << ',' << r.label.confidence << ',' << to_string(r.source) << '\n';
}

// ---------------------------------------------------------------------------
// Composition

std::vector<LabeledReport> compose_training_set(const std::vector<LabeledReport>& labeled,
                                                int min_confidence, double semantic_keyword_cap,
                                                std::uint64_t seed) {
    if (semantic_keyword_cap < 0.0 || semantic_keyword_cap >= 1.0)
        throw std::invalid_argument("semantic_keyword_cap must be in [0,1)");

    std::vector<LabeledReport> out;
    std::vector<LabeledReport> keyword_semantic;
    std::uint64_t random_semantic = 0;
    for (const auto& r : labeled) {
        if (r.label.confidence < min_confidence) continue;
        if (r.label.main != MainCategory::semantic) {
            out.push_back(r);
        } else if (r.source == LabelSource::random_sample) {
            out.push_back(r);
            ++random_semantic;
        } else {
            keyword_semantic.push_back(r);
        }
    }

    // Largest k with k <= cap * (random_count + k).
    auto cap_k = static_cast<std::uint64_t>(
        semantic_keyword_cap * double(random_semantic) / (1.0 - semantic_keyword_cap));
    std::uint64_t k = std::min<std::uint64_t>(cap_k, keyword_semantic.size());

    // Deterministic uniform choice: canonical order, then seeded shuffle.
    std::sort(keyword_semantic.begin(), keyword_semantic.end(),
              [](const LabeledReport& a, const LabeledReport& b) {
                  return std::tie(a.issue.repo, a.issue.issue_id) <
                         std::tie(b.issue.repo, b.issue.issue_id);
              });
    Rng rng(seed);
    rng.shuffle(keyword_semantic);
    out.insert(out.end(), keyword_semantic.begin(),
               keyword_semantic.begin() + static_cast<std::ptrdiff_t>(k));

    std::sort(out.begin(), out.end(), [](const LabeledReport& a, const LabeledReport& b) {
        return std::tie(a.issue.repo, a.issue.issue_id) <
               std::tie(b.issue.repo, b.issue.issue_id);
    });
    return out;
}

CorpusStats corpus_stats(const std::vector<LabeledReport>& reports) {
    CorpusStats s;
    s.total = reports.size();
    std::uint64_t sum = 0;
    bool first = true;
    for (const auto& r : reports) {
        ++s.per_class[std::string(to_string(r.label.main))];
        ++s.per_source[std::string(to_string(r.source))];
        std::uint64_t len = r.issue.title.size() + r.issue.body.size();
        sum += len;
        if (first || len < s.min_text_len) s.min_text_len = len;
        if (first || len > s.max_text_len) s.max_text_len = len;
        first = false;
    }
    if (s.total > 0) s.mean_text_len = double(sum) / double(s.total);
    return s;
}

} // namespace bugcause
