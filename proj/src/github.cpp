// SPDX-License-Identifier: Apache-2.0
#include "bugcause/github.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "bugcause/digest.hpp"

namespace bugcause {

using nlohmann::json;

void RepoRef::validate() const {
    if (owner.empty() || name.empty()) throw std::invalid_argument("repo owner/name must be non-empty");
    if (owner.find('/') != std::string::npos || name.find('/') != std::string::npos)
        throw std::invalid_argument("repo owner/name must not contain '/'");
}

void ApiConfig::validate() const {
    if (page_size < 1 || page_size > 100)
        throw std::invalid_argument("page_size must be in [1,100]");
    if (max_retries < 0) throw std::invalid_argument("max_retries must be >= 0");
}

std::vector<std::int64_t> scan_issue_refs(const std::string& message) {
    std::vector<std::int64_t> refs;
    for (std::size_t i = 0; i < message.size(); ++i) {
        if (message[i] != '#') continue;
        if (i > 0 && (std::isalnum(static_cast<unsigned char>(message[i - 1])) ||
                      message[i - 1] == '#'))
            continue;
        std::size_t j = i + 1;
        while (j < message.size() && std::isdigit(static_cast<unsigned char>(message[j]))) ++j;
        if (j > i + 1) {
            std::int64_t id = std::stoll(message.substr(i + 1, j - i - 1));
            if (std::find(refs.begin(), refs.end(), id) == refs.end()) refs.push_back(id);
        }
        i = j - 1;
    }
    return refs;
}

// ---------------------------------------------------------------------------
// Real transport

namespace {

class HttplibTransport final : public Transport {
public:
    HttpResponse get(const std::string& url, const std::map<std::string, std::string>& headers) override {
        auto scheme_end = url.find("://");
        if (scheme_end == std::string::npos) return {};
        auto host_start = scheme_end + 3;
        auto path_start = url.find('/', host_start);
        std::string origin = url.substr(0, path_start == std::string::npos ? url.size() : path_start);
        std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

        httplib::Client client(origin);
        client.set_follow_location(true);
        httplib::Headers h;
        for (const auto& [k, v] : headers) h.emplace(k, v);
        auto res = client.Get(path, h);
        if (!res) return {};
        HttpResponse out;
        out.status = res->status;
        out.body = res->body;
        for (const auto& [k, v] : res->headers) out.headers[k] = v;
        return out;
    }
};

} // namespace

std::unique_ptr<Transport> make_httplib_transport() {
    return std::make_unique<HttplibTransport>();
}

// ---------------------------------------------------------------------------
// Client

GithubClient::GithubClient(ApiConfig cfg, std::shared_ptr<Transport> transport, ClockFn now,
                           SleepFn sleep)
    : cfg_(std::move(cfg)), transport_(std::move(transport)) {
    cfg_.validate();
    now_ = now ? std::move(now) : [] { return std::int64_t(std::time(nullptr)); };
    sleep_ = sleep ? std::move(sleep) : [](std::int64_t s) {
        std::this_thread::sleep_for(std::chrono::seconds(s));
    };
    if (!cfg_.cache_dir.empty()) std::filesystem::create_directories(cfg_.cache_dir);
}

HttpResponse GithubClient::issue_request(const std::string& url) {
    // never send a request into a known-exhausted rate window
    if (rate_limit_.remaining == 0) {
        std::int64_t now = now_();
        if (now < rate_limit_.reset_at) sleep_(rate_limit_.reset_at - now + 1);
        rate_limit_.remaining = -1;
    }

    std::map<std::string, std::string> headers{{"Accept", "application/vnd.github+json"},
                                               {"User-Agent", "bugcause"}};
    if (cfg_.auth_token) headers["Authorization"] = "Bearer " + *cfg_.auth_token;

    ++network_requests_;
    auto res = transport_->get(url, headers);

    auto header_int = [&](const char* name) -> std::optional<std::int64_t> {
        auto it = res.headers.find(name);
        if (it == res.headers.end()) return std::nullopt;
        try {
            return std::stoll(it->second);
        } catch (...) {
            return std::nullopt;
        }
    };
    if (auto remaining = header_int("X-RateLimit-Remaining")) rate_limit_.remaining = *remaining;
    if (auto reset = header_int("X-RateLimit-Reset")) rate_limit_.reset_at = *reset;
    return res;
}

std::string GithubClient::get_cached(const std::string& url) {
    std::filesystem::path cache_file;
    if (!cfg_.cache_dir.empty()) {
        cache_file = std::filesystem::path(cfg_.cache_dir) / sha256_hex(url);
        if (std::filesystem::exists(cache_file)) {
            std::ifstream in(cache_file, std::ios::binary);
            return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
        }
    }

    int transient_failures = 0;
    for (;;) {
        auto res = issue_request(url);
        if (res.status == 200) {
            if (!cache_file.empty()) {
                std::ofstream out(cache_file, std::ios::binary | std::ios::trunc);
                out << res.body;
            }
            return res.body;
        }
        if (res.status == 404) throw std::runtime_error("404:" + url);
        if (res.status == 401)
            throw std::runtime_error("authentication failed (HTTP 401); set ISSUE_API_TOKEN");
        if (res.status == 403) {
            if (rate_limit_.remaining == 0) continue; // next attempt waits for the reset
            throw std::runtime_error(
                "access forbidden (HTTP 403); check ISSUE_API_TOKEN permissions");
        }
        if (++transient_failures >= std::max(1, cfg_.max_retries))
            throw std::runtime_error("request failed after " + std::to_string(transient_failures) +
                                     " attempts: " + url + " (last status " +
                                     std::to_string(res.status) + ")");
    }
}

std::vector<IssueRecord> GithubClient::fetch_closed_bug_issues(
    const RepoRef& repo, const std::vector<std::string>& label_substrings) {
    repo.validate();
    auto lower = [](std::string s) {
        std::transform(s.begin(), s.end(), s.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        return s;
    };

    std::vector<IssueRecord> out;
    for (int page = 1;; ++page) {
        std::string url = cfg_.base_url + "/repos/" + repo.owner + "/" + repo.name +
                          "/issues?state=closed&per_page=" + std::to_string(cfg_.page_size) +
                          "&page=" + std::to_string(page);
        auto body = get_cached(url);
        auto j = json::parse(body);
        if (!j.is_array()) throw std::runtime_error("unexpected issues payload: " + url);
        for (const auto& ji : j) {
            if (ji.contains("pull_request")) continue;
            bool matched = false;
            std::vector<std::string> labels;
            for (const auto& jl : ji.value("labels", json::array())) {
                std::string name = jl.at("name").get<std::string>();
                for (const auto& sub : label_substrings)
                    if (lower(name).find(lower(sub)) != std::string::npos) matched = true;
                labels.push_back(std::move(name));
            }
            if (!matched) continue;

            IssueRecord rec;
            rec.repo = repo.full();
            rec.issue_id = ji.at("number").get<std::int64_t>();
            rec.title = ji.value("title", "");
            rec.body = ji.contains("body") && ji["body"].is_string() ? ji["body"].get<std::string>() : "";
            rec.labels = std::move(labels);
            rec.state = IssueState::closed;
            rec.created_at = ji.value("created_at", "");
            rec.closed_at =
                ji.contains("closed_at") && ji["closed_at"].is_string() ? ji["closed_at"].get<std::string>() : "";
            rec.reporter = ji.contains("user") ? ji["user"].value("login", "") : "";
            out.push_back(std::move(rec));
        }
        if (j.size() < static_cast<std::size_t>(cfg_.page_size)) break;
    }
    return out;
}

std::vector<CommitRecord> GithubClient::fetch_linked_commits(const RepoRef& repo,
                                                             std::int64_t issue_id) {
    repo.validate();
    std::vector<std::string> shas;

    // (a) timeline link events
    {
        std::string url = cfg_.base_url + "/repos/" + repo.owner + "/" + repo.name + "/issues/" +
                          std::to_string(issue_id) + "/timeline?per_page=" +
                          std::to_string(cfg_.page_size);
        auto j = json::parse(get_cached(url));
        for (const auto& ev : j)
            if (ev.contains("commit_id") && ev["commit_id"].is_string())
                shas.push_back(ev["commit_id"].get<std::string>());
    }

    // (b) repository commits whose message references the issue
    for (int page = 1;; ++page) {
        std::string url = cfg_.base_url + "/repos/" + repo.owner + "/" + repo.name +
                          "/commits?per_page=" + std::to_string(cfg_.page_size) +
                          "&page=" + std::to_string(page);
        auto j = json::parse(get_cached(url));
        for (const auto& jc : j) {
            std::string message = jc.at("commit").value("message", "");
            auto refs = scan_issue_refs(message);
            if (std::find(refs.begin(), refs.end(), issue_id) != refs.end())
                shas.push_back(jc.at("sha").get<std::string>());
        }
        if (j.size() < static_cast<std::size_t>(cfg_.page_size)) break;
    }

    std::sort(shas.begin(), shas.end());
    shas.erase(std::unique(shas.begin(), shas.end()), shas.end());

    std::vector<CommitRecord> out;
    for (const auto& sha : shas) {
        std::string url =
            cfg_.base_url + "/repos/" + repo.owner + "/" + repo.name + "/commits/" + sha;
        CommitRecord rec;
        rec.sha = sha;
        try {
            auto j = json::parse(get_cached(url));
            rec.message = j.at("commit").value("message", "");
            for (const auto& jf : j.value("files", json::array())) {
                FileChange fc;
                fc.path = jf.at("filename").get<std::string>();
                fc.insertions = jf.value("additions", 0u);
                fc.deletions = jf.value("deletions", 0u);
                rec.files.push_back(std::move(fc));
            }
            rec.linked_issue_ids = scan_issue_refs(rec.message);
        } catch (const std::runtime_error& e) {
            if (std::string_view(e.what()).starts_with("404:")) rec.unavailable = true;
            else throw;
        }
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<FileChange> GithubClient::fetch_commit_stats(const RepoRef& repo,
                                                         const std::string& sha,
                                                         bool* unavailable) {
    repo.validate();
    if (unavailable) *unavailable = false;
    std::string url = cfg_.base_url + "/repos/" + repo.owner + "/" + repo.name + "/commits/" + sha;
    std::string body;
    try {
        body = get_cached(url);
    } catch (const std::runtime_error& e) {
        if (std::string_view(e.what()).starts_with("404:") && unavailable) {
            *unavailable = true;
            return {};
        }
        throw;
    }
    auto j = json::parse(body);
    std::vector<FileChange> out;
    for (const auto& jf : j.value("files", json::array()))
        out.push_back({jf.at("filename").get<std::string>(), jf.value("additions", 0u),
                       jf.value("deletions", 0u)});
    return out;
}

} // namespace bugcause
