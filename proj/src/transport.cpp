// SPDX-License-Identifier: Apache-2.0
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "oceanqa/transport.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "oceanqa/error.hpp"
#include "oceanqa/text_util.hpp"

namespace oceanqa {

std::string_view to_string(TransportMode m) noexcept {
    switch (m) {
        case TransportMode::Live: return "Live";
        case TransportMode::Replay: return "Replay";
        case TransportMode::RecordThenReplay: return "RecordThenReplay";
    }
    return "Replay";
}

std::optional<TransportMode> transport_mode_from_string(std::string_view s) noexcept {
    for (auto m : {TransportMode::Live, TransportMode::Replay, TransportMode::RecordThenReplay})
        if (to_string(m) == s) return m;
    auto lower = to_lower(s);
    if (lower == "live") return TransportMode::Live;
    if (lower == "replay") return TransportMode::Replay;
    if (lower == "record") return TransportMode::RecordThenReplay;
    return std::nullopt;
}

std::string percent_encode(std::string_view s) {
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~')
            out += static_cast<char>(c);
        else
            out += fmt::format("%{:02X}", c);
    }
    return out;
}

std::string canonical_url(const HttpRequest& req) {
    if (!req.raw_query.empty()) return req.base_url + "?" + percent_encode(req.raw_query);
    auto params = req.params;
    std::sort(params.begin(), params.end());
    std::string out = req.base_url;
    char sep = '?';
    for (const auto& [k, v] : params) {
        out += sep + percent_encode(k) + "=" + percent_encode(v);
        sep = '&';
    }
    return out;
}

std::string fingerprint(const HttpRequest& req) { return sha256_hex(canonical_url(req)); }

Timestamp system_now() { return std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now()); }

HttpFetcher default_http_fetcher() {
    return [](const std::string& url, std::chrono::seconds timeout) {
        auto scheme_end = url.find("://");
        auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
        if (scheme_end == std::string::npos)
            throw Error(ErrorCode::ProviderUnavailable, "malformed URL " + url, {{"url", url}, {"retryable", false}});
        const auto origin = url.substr(0, path_start);
        const auto path = path_start == std::string::npos ? std::string("/") : url.substr(path_start);
        httplib::Client cli(origin);
        cli.set_connection_timeout(timeout);
        cli.set_read_timeout(timeout);
        cli.set_follow_location(true);
        auto res = cli.Get(path);
        if (!res)
            throw Error(ErrorCode::ProviderUnavailable,
                        fmt::format("request to {} failed: {}", origin, httplib::to_string(res.error())),
                        {{"url", url}, {"retryable", true}});
        return HttpResponse{res->status, res->body, res->get_header_value("Content-Type")};
    };
}

namespace {

std::string host_of(const std::string& url) {
    auto s = url.find("://");
    s = s == std::string::npos ? 0 : s + 3;
    return url.substr(s, url.find('/', s) - s);
}

void atomic_write(const std::filesystem::path& path, std::string_view bytes) {
    auto tmp = path;
    tmp += fmt::format(".tmp{}", std::hash<std::thread::id>{}(std::this_thread::get_id()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw Error(ErrorCode::Internal, "cannot write " + tmp.string(), {{"path", tmp.string()}});
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace

FixtureStore::FixtureStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    if (dir_.empty()) return;
    auto index_path = dir_ / "index.json";
    if (!std::filesystem::exists(index_path)) return;
    std::ifstream in(index_path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
        for (const auto& [fp, m] : j.at("records").items()) {
            auto at = parse_timestamp(m.at("fetched_at").get<std::string>());
            if (!at) throw Error(ErrorCode::ConfigError, "bad fetched_at for " + fp);
            index_[fp] = Meta{m.at("url").get<std::string>(), m.value("status", 200),
                              m.at("content_type").get<std::string>(), *at, m.at("size").get<std::size_t>()};
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigError, "corrupt fixture index " + index_path.string() + ": " + e.what(),
                    {{"path", index_path.string()}});
    }
}

std::optional<RawRecord> FixtureStore::get(const std::string& fp) const {
    Meta meta;
    {
        std::lock_guard lock(mu_);
        auto it = index_.find(fp);
        if (it == index_.end()) return std::nullopt;
        meta = it->second;
    }
    std::ifstream in(dir_ / (fp + ".bin"), std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    RawRecord rec{fp, meta.url, meta.status, ss.str(), meta.content_type, meta.fetched_at};
    if (rec.bytes.size() != meta.size)
        throw Error(ErrorCode::FormatError, "fixture body size does not match index for " + fp,
                    {{"fingerprint", fp}, {"expected", meta.size}, {"actual", rec.bytes.size()}});
    return rec;
}

void FixtureStore::put(const RawRecord& rec) {
    std::lock_guard lock(mu_);
    std::filesystem::create_directories(dir_);
    atomic_write(dir_ / (rec.fingerprint + ".bin"), rec.bytes);
    index_[rec.fingerprint] = Meta{rec.url, rec.status, rec.content_type, rec.fetched_at, rec.bytes.size()};
    write_index();
}

void FixtureStore::write_index() const {
    nlohmann::json records = nlohmann::json::object();
    for (const auto& [fp, m] : index_)
        records[fp] = {{"url", m.url},
                       {"status", m.status},
                       {"content_type", m.content_type},
                       {"fetched_at", format_iso(m.fetched_at)},
                       {"size", m.size}};
    nlohmann::json j = {{"format", "oceanqa-fixtures/1"}, {"records", records}};
    atomic_write(dir_ / "index.json", j.dump(1) + "\n");
}

std::size_t FixtureStore::size() const {
    std::lock_guard lock(mu_);
    return index_.size();
}

Transport::Transport(TransportConfig config, HttpFetcher fetcher, Clock clock)
    : config_(std::move(config)), fetcher_(std::move(fetcher)), clock_(std::move(clock)), store_(config_.cache_dir) {
    if (config_.cache_dir.empty())
        throw Error(ErrorCode::ConfigError, "transport needs a cache directory", {{"field", "cache_dir"}});
    if (config_.rate_limit <= 0.0) throw Error(ErrorCode::ConfigError, "rate_limit must be positive", {{"field", "rate_limit"}});
}

std::size_t Transport::upstream_calls() const {
    std::lock_guard lock(mu_);
    return upstream_calls_;
}

void Transport::throttle(const std::string& host) {
    const auto spacing = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(1.0 / config_.rate_limit));
    std::chrono::steady_clock::time_point slot;
    {
        std::lock_guard lock(mu_);
        auto now = std::chrono::steady_clock::now();
        auto& next = next_slot_[host];
        slot = std::max(now, next);
        next = slot + spacing;
    }
    std::this_thread::sleep_until(slot);
}

RawRecord Transport::fetch_upstream(const HttpRequest& req, const std::string& fp) {
    const auto url = canonical_url(req);
    throttle(host_of(url));
    {
        std::lock_guard lock(mu_);
        ++upstream_calls_;
    }
    spdlog::debug("GET {}", url);
    auto res = fetcher_(url, config_.timeout);
    RawRecord rec{fp, url, res.status, std::move(res.body), std::move(res.content_type), clock_()};
    if (rec.status < 500) store_.put(rec);
    return rec;
}

RawRecord Transport::get(const HttpRequest& req) {
    const auto fp = fingerprint(req);
    if (auto hit = store_.get(fp)) {
        const bool fresh = config_.mode != TransportMode::Live || req.closed_range ||
                           clock_() < hit->fetched_at + config_.recent_ttl;
        if (fresh) return *hit;
    }
    if (config_.mode == TransportMode::Replay)
        throw Error(ErrorCode::ProviderError, "no recorded response for " + canonical_url(req),
                    {{"fingerprint", fp}, {"url", canonical_url(req)}, {"retryable", false}});

    std::promise<RawRecord> promise;
    std::shared_future<RawRecord> fut;
    bool leader = false;
    {
        std::lock_guard lock(mu_);
        auto it = in_flight_.find(fp);
        if (it == in_flight_.end()) {
            fut = promise.get_future().share();
            in_flight_.emplace(fp, fut);
            leader = true;
        } else {
            fut = it->second;
        }
    }
    if (leader) {
        try {
            promise.set_value(fetch_upstream(req, fp));
        } catch (...) {
            promise.set_exception(std::current_exception());
        }
        std::lock_guard lock(mu_);
        in_flight_.erase(fp);
    }
    return fut.get();
}

}  // namespace oceanqa
