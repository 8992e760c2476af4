// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "oceanqa/time.hpp"

namespace oceanqa {

enum class TransportMode { Live, Replay, RecordThenReplay };

std::string_view to_string(TransportMode m) noexcept;
std::optional<TransportMode> transport_mode_from_string(std::string_view s) noexcept;

struct HttpRequest {
    std::string base_url;
    std::vector<std::pair<std::string, std::string>> params;  // order irrelevant; sorted for the fingerprint
    std::string raw_query;                                    // used verbatim (percent-encoded) when non-empty
    bool closed_range = false;                                // historical window: cache never goes stale
};

struct HttpResponse {
    int status = 0;
    std::string body;
    std::string content_type;
};

struct RawRecord {
    std::string fingerprint;
    std::string url;
    int status = 200;
    std::string bytes;
    std::string content_type;
    Timestamp fetched_at{};
};

/// Performs one GET on a fully built URL. Throws Error(ProviderUnavailable)
/// on connection failure.
using HttpFetcher = std::function<HttpResponse(const std::string& url, std::chrono::seconds timeout)>;
using Clock = std::function<Timestamp()>;

HttpFetcher default_http_fetcher();
Timestamp system_now();

std::string percent_encode(std::string_view s);
/// base?k=v&... with keys sorted, or base?raw_query.
std::string canonical_url(const HttpRequest& req);
std::string fingerprint(const HttpRequest& req);

/// Directory of `<fingerprint>.bin` bodies plus an `index.json` manifest.
/// Writes go through a temp file and rename.
class FixtureStore {
public:
    explicit FixtureStore(std::filesystem::path dir);

    std::optional<RawRecord> get(const std::string& fp) const;
    void put(const RawRecord& rec);
    std::size_t size() const;
    const std::filesystem::path& dir() const noexcept { return dir_; }

private:
    struct Meta {
        std::string url;
        int status;
        std::string content_type;
        Timestamp fetched_at;
        std::size_t size;
    };
    void write_index() const;

    std::filesystem::path dir_;
    mutable std::mutex mu_;
    std::map<std::string, Meta> index_;
};

struct TransportConfig {
    TransportMode mode = TransportMode::Replay;
    std::filesystem::path cache_dir;
    double rate_limit = 2.0;  // requests per second per host
    std::chrono::seconds timeout{60};
    std::chrono::hours recent_ttl{24};
};

/// Shared, thread-safe HTTP access with record/replay caching, per-host
/// rate limiting and coalescing of identical in-flight requests.
class Transport {
public:
    explicit Transport(TransportConfig config, HttpFetcher fetcher = default_http_fetcher(), Clock clock = system_now);

    RawRecord get(const HttpRequest& req);

    TransportMode mode() const noexcept { return config_.mode; }
    Timestamp now() const { return clock_(); }
    std::size_t upstream_calls() const;
    const FixtureStore& store() const noexcept { return store_; }

private:
    RawRecord fetch_upstream(const HttpRequest& req, const std::string& fp);
    void throttle(const std::string& host);

    TransportConfig config_;
    HttpFetcher fetcher_;
    Clock clock_;
    FixtureStore store_;
    mutable std::mutex mu_;
    std::map<std::string, std::shared_future<RawRecord>> in_flight_;
    std::map<std::string, std::chrono::steady_clock::time_point> next_slot_;
    std::size_t upstream_calls_ = 0;
};

}  // namespace oceanqa
