// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bugcause/corpus.hpp"

namespace bugcause {

struct RepoRef {
    std::string owner;
    std::string name;

    void validate() const;
    std::string full() const { return owner + "/" + name; }
};

struct ApiConfig {
    std::string base_url = "https://api.github.com";
    std::optional<std::string> auth_token; // from ISSUE_API_TOKEN, never a flag
    int page_size = 100;
    int max_retries = 5;
    std::string cache_dir;

    void validate() const;
};

struct RateLimitState {
    std::int64_t remaining = -1; // unknown until a response was seen
    std::int64_t reset_at = 0;   // unix seconds
};

struct HttpResponse {
    int status = 0; // 0 = transport failure
    std::string body;
    std::map<std::string, std::string> headers;
};

// Abstract so tests run against an in-process fixture transport.
class Transport {
public:
    virtual ~Transport() = default;
    virtual HttpResponse get(const std::string& url,
                             const std::map<std::string, std::string>& headers) = 0;
};

std::unique_ptr<Transport> make_httplib_transport();

// Extracts every issue number referenced as a `#<n>` token (commit-message
// linking; covers "Fixes #3", "close #4" and bare references).
std::vector<std::int64_t> scan_issue_refs(const std::string& message);

class GithubClient {
public:
    using ClockFn = std::function<std::int64_t()>; // unix seconds
    using SleepFn = std::function<void(std::int64_t seconds)>;

    GithubClient(ApiConfig cfg, std::shared_ptr<Transport> transport,
                 ClockFn now = nullptr, SleepFn sleep = nullptr);

    std::vector<IssueRecord> fetch_closed_bug_issues(const RepoRef& repo,
                                                     const std::vector<std::string>& label_substrings);
    std::vector<CommitRecord> fetch_linked_commits(const RepoRef& repo, std::int64_t issue_id);
    std::vector<FileChange> fetch_commit_stats(const RepoRef& repo, const std::string& sha,
                                               bool* unavailable = nullptr);

    std::uint64_t network_requests() const { return network_requests_; }
    const RateLimitState& rate_limit() const { return rate_limit_; }

private:
    std::string get_cached(const std::string& url); // throws on fatal errors
    HttpResponse issue_request(const std::string& url);

    ApiConfig cfg_;
    std::shared_ptr<Transport> transport_;
    ClockFn now_;
    SleepFn sleep_;
    RateLimitState rate_limit_;
    std::uint64_t network_requests_ = 0;
};

} // namespace bugcause
