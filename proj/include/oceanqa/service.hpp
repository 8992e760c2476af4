// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "oceanqa/dispatcher.hpp"
#include "oceanqa/error.hpp"
#include "oceanqa/noaa.hpp"
#include "oceanqa/orchestrator.hpp"
#include "oceanqa/rendering.hpp"
#include "oceanqa/retrieval.hpp"
#include "oceanqa/transport.hpp"

namespace oceanqa {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    int threads = 8;
    std::size_t max_body_bytes = 64 * 1024;

    TransportMode transport_mode = TransportMode::Replay;
    std::string upstream = "noaa";  // "noaa" or "synthetic"
    std::filesystem::path fixture_dir;
    double rate_limit = 2.0;
    std::chrono::seconds timeout{60};

    std::filesystem::path gazetteer;
    std::filesystem::path providers;
    std::filesystem::path coverage;
    std::filesystem::path corpus_dir;  // DocStore snapshot directory
    std::filesystem::path figure_dir;

    std::string web = "stub";  // stub | brave | none
    std::filesystem::path web_fixtures;
    std::string web_endpoint = "https://api.search.brave.com/res/v1/web/search";
    std::string web_api_key;

    std::optional<ModelConfig> model;
    std::vector<std::string> cors_origins;
    std::optional<Timestamp> clock;  // fixed "now"; unset means the system clock
};

using EnvLookup = std::function<std::optional<std::string>(const std::string& name)>;
std::optional<std::string> process_env(const std::string& name);

/// Reads the JSON config (relative paths resolve against its directory) and
/// applies OCEANQA_* environment overrides. Throws ConfigError naming the
/// offending field.
ServiceConfig load_service_config(const std::filesystem::path& path, const EnvLookup& env = process_env);
ServiceConfig parse_service_config(const nlohmann::json& j, const std::filesystem::path& base, const EnvLookup& env = process_env);

/// Fails fast with ConfigError {field, path} on the first missing path.
void check_paths(const ServiceConfig& cfg);

/// Every long-lived object the service shares between requests.
class App {
public:
    /// `upstream` overrides the HTTP fetcher (required when cfg.upstream is
    /// "synthetic"); `model` overrides the configured model endpoint.
    static std::unique_ptr<App> build(const ServiceConfig& cfg, HttpFetcher upstream = {},
                                      std::shared_ptr<const ModelClient> model = nullptr);

    const ServiceConfig& config() const noexcept { return cfg_; }
    Registry& registry() noexcept { return *registry_; }
    const Registry& registry() const noexcept { return *registry_; }
    const Orchestrator& orchestrator() const noexcept { return *orchestrator_; }
    const Transport& transport() const noexcept { return *transport_; }
    const DocStore& docs() const noexcept { return *docs_; }
    const FigureStore& figures() const noexcept { return *figures_; }
    Timestamp now() const;

private:
    App() = default;

    ServiceConfig cfg_;
    std::shared_ptr<Transport> transport_;
    std::shared_ptr<const Gazetteer> gazetteer_;
    std::shared_ptr<const NoaaClients> clients_;
    std::shared_ptr<FigureStore> figures_;
    std::shared_ptr<DocStore> docs_;
    std::shared_ptr<const WebSearch> web_;
    std::shared_ptr<const ModelClient> model_;
    std::unique_ptr<Registry> registry_;
    std::unique_ptr<Orchestrator> orchestrator_;
};

struct Reply {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

/// HTTP status for an error escaping a request.
int http_status(ErrorCode code) noexcept;
/// {"error": {code, message, details}} with the mapped status.
Reply error_reply(const Error& e);

/// Endpoint logic, independent of the socket layer.
class Service {
public:
    explicit Service(const App& app);

    Reply query(const std::string& body) const;
    Reply functions() const;
    Reply health() const;
    Reply figure(const std::string& name) const;  // "<hash>" or "<hash>.svg"

    /// CORS headers for a request from `origin`; empty when not allowed.
    std::vector<std::pair<std::string, std::string>> cors_headers(const std::string& origin) const;

private:
    const App& app_;
};

/// httplib server bound to a Service.
class HttpServer {
public:
    explicit HttpServer(const App& app);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds host:port (port 0 picks a free one) and returns the port.
    /// Throws ConfigError when binding fails.
    int bind(const std::string& host, int port);
    /// Blocks until stop().
    void run();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace oceanqa
