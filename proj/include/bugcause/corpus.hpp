// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bugcause {

// ---------------------------------------------------------------------------
// Records

struct FileChange {
    std::string path;
    std::uint32_t insertions = 0;
    std::uint32_t deletions = 0;
    bool operator==(const FileChange&) const = default;
};

struct CommitRecord {
    std::string sha; // 40-char lowercase hex
    std::string message;
    std::vector<FileChange> files;
    std::vector<std::int64_t> linked_issue_ids;
    bool unavailable = false; // sha no longer reachable in the repository

    void validate() const;
    bool operator==(const CommitRecord&) const = default;
};

enum class IssueState { open, closed };

struct IssueRecord {
    std::string repo; // owner/name
    std::int64_t issue_id = 0;
    std::string title;
    std::string body;
    std::vector<std::string> labels;
    IssueState state = IssueState::open;
    std::string created_at; // ISO-8601 UTC
    std::string closed_at;  // empty when still open
    std::string reporter;
    std::vector<CommitRecord> commits;

    void validate() const;
    bool operator==(const IssueRecord&) const = default;
};

// ---------------------------------------------------------------------------
// Labels

enum class MainCategory { semantic, memory, concurrency };

std::string_view to_string(MainCategory c);
MainCategory main_category_from_string(std::string_view s);

// Sub-categories valid for a given main category.
const std::vector<std::string>& sub_categories(MainCategory c);

struct RootCauseLabel {
    MainCategory main = MainCategory::semantic;
    std::string sub;
    int confidence = 0; // 1..10

    void validate() const;
};

enum class LabelSource { random_sample, keyword_search };
std::string_view to_string(LabelSource s);
LabelSource label_source_from_string(std::string_view s);

struct LabeledIssueRow {
    std::string repo;
    std::int64_t issue_id = 0;
    RootCauseLabel label;
    LabelSource source = LabelSource::random_sample;
};

struct LabeledReport {
    IssueRecord issue;
    RootCauseLabel label;
    LabelSource source = LabelSource::random_sample;
};

// ---------------------------------------------------------------------------
// Filtering

struct FilterConfig {
    std::uint32_t max_commits_per_issue = 10; // exclusive
    std::uint32_t max_files_per_commit = 20;  // exclusive
    std::uint32_t max_lines_per_commit = 250; // exclusive, insertions + deletions
    std::vector<std::string> bug_label_substrings = {"bug", "defect", "regression"};
    std::string production_code_suffix = ".java";
    std::vector<std::string> test_path_markers = {"/test/", "/tests/", "src/test"};

    void validate() const;
};

enum class RejectReason {
    no_commits,
    multi_issue_commit,
    too_many_commits,
    too_many_files,
    too_many_lines,
    no_production_code,
};
std::string_view to_string(RejectReason r);

struct FilterDecision {
    bool accepted = false;
    std::optional<RejectReason> reason;
};

struct FilterReport {
    std::uint64_t input = 0;
    std::uint64_t accepted = 0;
    std::uint64_t not_bug = 0;
    std::array<std::uint64_t, 6> rejected_by_reason{}; // indexed by RejectReason
};

bool is_bug_issue(const IssueRecord& issue, const FilterConfig& cfg);
FilterDecision apply_filters(const IssueRecord& issue, const FilterConfig& cfg);

std::pair<std::vector<IssueRecord>, FilterReport>
filter_corpus(const std::vector<IssueRecord>& issues, const FilterConfig& cfg);

// ---------------------------------------------------------------------------
// Keyword bootstrap

enum class KeywordClass { memory, concurrency };
std::string_view to_string(KeywordClass c);

struct CandidateEntry {
    std::string repo;
    std::int64_t issue_id = 0;
    std::vector<std::string> matched_keywords;
    KeywordClass matched_class = KeywordClass::memory;
};

struct CandidateSet {
    std::vector<CandidateEntry> entries;
};

using KeywordMap = std::map<KeywordClass, std::vector<std::string>>;

KeywordMap default_keywords();
KeywordMap load_keywords(const std::string& path); // JSON {"memory":[..],"concurrency":[..]}

// Scans commit messages only; titles and bodies are never inspected.
CandidateSet keyword_scan(const std::vector<IssueRecord>& issues, const KeywordMap& keywords);

// ---------------------------------------------------------------------------
// Dump and label file I/O

struct DumpStats {
    std::vector<IssueRecord> records;
    std::uint64_t skipped = 0;
    std::vector<std::string> warnings;
};

DumpStats load_dump(const std::string& path);
std::uint64_t write_dump(const std::vector<IssueRecord>& records, const std::string& path);

std::string issue_to_json_line(const IssueRecord& rec);
IssueRecord issue_from_json_line(const std::string& line);

std::vector<LabeledIssueRow> load_labels(const std::string& path);
void write_labels(const std::vector<LabeledIssueRow>& rows, const std::string& path);

// ---------------------------------------------------------------------------
// Training-set composition and stats

std::vector<LabeledReport> compose_training_set(const std::vector<LabeledReport>& labeled,
                                                int min_confidence, double semantic_keyword_cap,
                                                std::uint64_t seed);

struct CorpusStats {
    std::map<std::string, std::uint64_t> per_class;
    std::map<std::string, std::uint64_t> per_source;
    std::uint64_t total = 0;
    std::uint64_t min_text_len = 0;
    std::uint64_t max_text_len = 0;
    double mean_text_len = 0.0;
};

CorpusStats corpus_stats(const std::vector<LabeledReport>& reports);

} // namespace bugcause
