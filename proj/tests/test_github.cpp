// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "bugcause/github.hpp"

using namespace bugcause;
using nlohmann::json;

namespace {

constexpr const char* kBase = "https://fixture.test";

class FixtureTransport final : public Transport {
public:
    std::map<std::string, HttpResponse> routes;
    std::vector<std::string> requests;
    std::map<std::string, std::string> extra_headers; // rate-limit injection
    std::vector<std::map<std::string, std::string>> seen_headers;

    HttpResponse get(const std::string& url,
                     const std::map<std::string, std::string>& headers) override {
        requests.push_back(url);
        seen_headers.push_back(headers);
        auto it = routes.find(url);
        HttpResponse res = it == routes.end() ? HttpResponse{404, "{}", {}} : it->second;
        for (const auto& [k, v] : extra_headers) res.headers[k] = v;
        return res;
    }
};

HttpResponse ok(const json& j) { return {200, j.dump(), {}}; }

json issue_entry(int number, std::vector<std::string> labels, bool pr = false) {
    json j = {{"number", number},
              {"title", "Issue " + std::to_string(number)},
              {"body", "body text"},
              {"state", "closed"},
              {"created_at", "2020-01-01T00:00:00Z"},
              {"closed_at", "2020-02-01T00:00:00Z"},
              {"user", {{"login", "alice"}}},
              {"labels", json::array()}};
    for (const auto& l : labels) j["labels"].push_back({{"name", l}});
    if (pr) j["pull_request"] = {{"url", "https://fixture.test/pr"}};
    return j;
}

std::string issues_url(int page, int per_page = 100) {
    return std::string(kBase) + "/repos/o/r/issues?state=closed&per_page=" +
           std::to_string(per_page) + "&page=" + std::to_string(page);
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const char* name) : path(std::filesystem::temp_directory_path() / name) {
        std::filesystem::remove_all(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

ApiConfig fixture_config(const std::string& cache_dir = "") {
    ApiConfig cfg;
    cfg.base_url = kBase;
    cfg.cache_dir = cache_dir;
    return cfg;
}

} // namespace

TEST_CASE("issue references are bounded #<n> tokens, deduplicated") {
    CHECK(scan_issue_refs("Fixes #3 and #4") == std::vector<std::int64_t>{3, 4});
    CHECK(scan_issue_refs("close #4. #4 again, see (#17)") == std::vector<std::int64_t>{4, 17});
    CHECK(scan_issue_refs("sha1#5 and ##6 and # 7 and #").empty());
    CHECK(scan_issue_refs("").empty());
    CHECK(scan_issue_refs("prefix#8 but\n#9 on its own line") == std::vector<std::int64_t>{9});
}

TEST_CASE("issue fetch paginates to the short page and filters labels") {
    auto transport = std::make_shared<FixtureTransport>();
    // 2 full pages of 100 plus a short page of 37 = 237 raw entries.
    int next = 1;
    for (int page = 1; page <= 3; ++page) {
        json arr = json::array();
        int count = page == 3 ? 37 : 100;
        for (int i = 0; i < count; ++i) {
            int n = next++;
            if (n % 10 == 0) arr.push_back(issue_entry(n, {"Bug-P1"}, /*pr=*/true));
            else if (n % 3 == 0) arr.push_back(issue_entry(n, {"Defect", "ui"}));
            else arr.push_back(issue_entry(n, {"enhancement"}));
        }
        transport->routes[issues_url(page)] = ok(arr);
    }

    GithubClient client(fixture_config(), transport);
    auto issues = client.fetch_closed_bug_issues({"o", "r"}, {"bug", "defect"});

    // Raw entries 1..237: multiples of 10 are PRs (excluded even though the
    // label matches); multiples of 3 that are not multiples of 10 match
    // "defect". |{3k <= 237}| = 79, minus |{30k <= 237}| = 7 → 72.
    CHECK(issues.size() == 72);
    for (const auto& rec : issues) {
        CHECK(rec.repo == "o/r");
        CHECK(rec.issue_id % 3 == 0);
        CHECK(rec.issue_id % 10 != 0);
        CHECK(rec.state == IssueState::closed);
        CHECK(rec.labels == std::vector<std::string>{"Defect", "ui"});
        CHECK(rec.reporter == "alice");
    }
    CHECK(transport->requests.size() == 3); // exactly one request per page
}

TEST_CASE("linked commits come from timeline events and message references") {
    auto transport = std::make_shared<FixtureTransport>();
    const std::string sha_timeline(40, 'a');
    const std::string sha_message(40, 'b');
    const std::string sha_both(40, 'c');
    const std::string sha_gone(40, 'd');

    transport->routes[std::string(kBase) + "/repos/o/r/issues/5/timeline?per_page=100"] =
        ok(json::array({{{"event", "referenced"}, {"commit_id", sha_timeline}},
                        {{"event", "closed"}, {"commit_id", sha_both}},
                        {{"event", "labeled"}},
                        {{"event", "referenced"}, {"commit_id", sha_gone}}}));
    transport->routes[std::string(kBase) + "/repos/o/r/commits?per_page=100&page=1"] =
        ok(json::array({{{"sha", sha_message}, {"commit", {{"message", "fix race, closes #5"}}}},
                        {{"sha", sha_both}, {"commit", {{"message", "follow-up for #5"}}}},
                        {{"sha", std::string(40, 'e')},
                         {"commit", {{"message", "unrelated #6"}}}}}));

    auto commit_detail = [&](const std::string& sha, const std::string& message) {
        transport->routes[std::string(kBase) + "/repos/o/r/commits/" + sha] =
            ok({{"sha", sha},
                {"commit", {{"message", message}}},
                {"files", json::array({{{"filename", "src/main/A.java"},
                                        {"additions", 12},
                                        {"deletions", 3}}})}});
    };
    commit_detail(sha_timeline, "fix deadlock for #5");
    commit_detail(sha_message, "fix race, closes #5");
    commit_detail(sha_both, "follow-up for #5");
    // sha_gone has no detail route: the API answers 404.

    GithubClient client(fixture_config(), transport);
    auto commits = client.fetch_linked_commits({"o", "r"}, 5);

    REQUIRE(commits.size() == 4); // union of both sources, sha_both only once
    std::map<std::string, const CommitRecord*> by_sha;
    for (const auto& c : commits) by_sha[c.sha] = &c;
    CHECK(by_sha.count(sha_timeline) == 1);
    CHECK(by_sha.count(sha_message) == 1);
    CHECK(by_sha.count(sha_both) == 1);
    REQUIRE(by_sha.count(sha_gone) == 1);
    CHECK(by_sha.at(sha_gone)->unavailable);
    CHECK_FALSE(by_sha.at(sha_timeline)->unavailable);
    CHECK(by_sha.at(sha_timeline)->linked_issue_ids == std::vector<std::int64_t>{5});
    REQUIRE(by_sha.at(sha_message)->files.size() == 1);
    CHECK(by_sha.at(sha_message)->files[0] == FileChange{"src/main/A.java", 12, 3});
}

TEST_CASE("commit stats handle files, empty diffs, and vanished shas") {
    auto transport = std::make_shared<FixtureTransport>();
    const std::string sha(40, 'f');
    transport->routes[std::string(kBase) + "/repos/o/r/commits/" + sha] =
        ok({{"sha", sha},
            {"commit", {{"message", "m"}}},
            {"files", json::array({{{"filename", "src/A.java"}, {"additions", 5}, {"deletions", 2}},
                                   {{"filename", "img/logo.png"}}})}}); // binary: no counts
    const std::string sha_empty(40, '0');
    transport->routes[std::string(kBase) + "/repos/o/r/commits/" + sha_empty] =
        ok({{"sha", sha_empty}, {"commit", {{"message", "empty"}}}});

    GithubClient client(fixture_config(), transport);
    bool unavailable = true;
    auto files = client.fetch_commit_stats({"o", "r"}, sha, &unavailable);
    CHECK_FALSE(unavailable);
    REQUIRE(files.size() == 2);
    CHECK(files[0] == FileChange{"src/A.java", 5, 2});
    CHECK(files[1] == FileChange{"img/logo.png", 0, 0}); // binary files count as zero lines

    CHECK(client.fetch_commit_stats({"o", "r"}, sha_empty, &unavailable).empty());
    CHECK_FALSE(unavailable);

    CHECK(client.fetch_commit_stats({"o", "r"}, std::string(40, '9'), &unavailable).empty());
    CHECK(unavailable);
}

TEST_CASE("client never requests inside an exhausted rate window") {
    auto transport = std::make_shared<FixtureTransport>();
    transport->routes[issues_url(1)] = ok(json::array({issue_entry(1, {"bug"})}));
    transport->routes[std::string(kBase) + "/repos/o/r/commits/" + std::string(40, 'a')] =
        ok({{"sha", std::string(40, 'a')}, {"commit", {{"message", "m"}}}});

    std::int64_t clock = 500;
    std::vector<std::int64_t> request_times;
    std::vector<std::int64_t> sleeps;
    auto logging = std::make_shared<FixtureTransport>(*transport);

    GithubClient client(fixture_config(), logging,
                        [&] { return clock; },
                        [&](std::int64_t s) {
                            sleeps.push_back(s);
                            clock += s;
                        });

    // First response exhausts the window until t=1000.
    logging->extra_headers = {{"X-RateLimit-Remaining", "0"}, {"X-RateLimit-Reset", "1000"}};
    auto issues = client.fetch_closed_bug_issues({"o", "r"}, {"bug"});
    CHECK(issues.size() == 1);
    std::size_t requests_before = logging->requests.size();

    // The next call must wait out the window before touching the transport.
    logging->extra_headers = {{"X-RateLimit-Remaining", "4999"}};
    bool unavailable = false;
    client.fetch_commit_stats({"o", "r"}, std::string(40, 'a'), &unavailable);
    CHECK(logging->requests.size() == requests_before + 1);
    REQUIRE(sleeps.size() == 1);
    CHECK(sleeps[0] >= 500); // 1000 - 500
    CHECK(clock >= 1000);    // request happened only after the reset
    CHECK(client.rate_limit().remaining == 4999);
}

TEST_CASE("auth failures are fatal and name the token variable") {
    auto transport = std::make_shared<FixtureTransport>();
    transport->routes[issues_url(1)] = {401, "{}", {}};
    GithubClient client(fixture_config(), transport);
    CHECK_THROWS_WITH_AS(
        static_cast<void>(client.fetch_closed_bug_issues({"o", "r"}, {"bug"})),
        doctest::Contains("ISSUE_API_TOKEN"), std::runtime_error);

    SUBCASE("the token travels as a bearer header when configured") {
        auto cfg = fixture_config();
        cfg.auth_token = "sekret";
        transport->routes[issues_url(1)] = ok(json::array());
        GithubClient authed(cfg, transport);
        static_cast<void>(authed.fetch_closed_bug_issues({"o", "r"}, {"bug"}));
        REQUIRE(!transport->seen_headers.empty());
        CHECK(transport->seen_headers.back().at("Authorization") == "Bearer sekret");
    }
}

TEST_CASE("transient failures retry up to the limit, then fail") {
    auto transport = std::make_shared<FixtureTransport>();
    transport->routes[issues_url(1)] = {500, "oops", {}};
    auto cfg = fixture_config();
    cfg.max_retries = 3;
    GithubClient client(cfg, transport);
    CHECK_THROWS_WITH_AS(
        static_cast<void>(client.fetch_closed_bug_issues({"o", "r"}, {"bug"})),
        doctest::Contains("3 attempts"), std::runtime_error);
    CHECK(transport->requests.size() == 3);
}

TEST_CASE("a warm cache serves identical bytes with zero network requests") {
    TempDir cache("bugcause_gh_cache");
    auto transport = std::make_shared<FixtureTransport>();
    transport->routes[issues_url(1)] =
        ok(json::array({issue_entry(1, {"bug"}), issue_entry(2, {"enhancement"})}));

    GithubClient warm(fixture_config(cache.path.string()), transport);
    auto first = warm.fetch_closed_bug_issues({"o", "r"}, {"bug"});
    CHECK(warm.network_requests() == 1);

    // Fresh client, same cache: the transport must never be touched.
    auto dead_transport = std::make_shared<FixtureTransport>(); // would 404 everything
    GithubClient cached(fixture_config(cache.path.string()), dead_transport);
    auto second = cached.fetch_closed_bug_issues({"o", "r"}, {"bug"});
    CHECK(cached.network_requests() == 0);
    CHECK(dead_transport->requests.empty());
    CHECK(second == first);
}

TEST_CASE("config and repo validation") {
    CHECK_THROWS_AS((RepoRef{"", "r"}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((RepoRef{"o/x", "r"}.validate()), std::invalid_argument);
    ApiConfig cfg;
    cfg.page_size = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.page_size = 101;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
