// SPDX-License-Identifier: Apache-2.0
#include "oceanqa/service.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include "oceanqa/gazetteer.hpp"
#include "oceanqa/text_util.hpp"

namespace oceanqa {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kMaxQueryText = 2000;

[[noreturn]] void config_error(const std::string& field, const std::string& problem, json extra = json::object()) {
    extra["field"] = field;
    throw Error(ErrorCode::ConfigError, "config " + field + ": " + problem, std::move(extra));
}

const json* at_path(const json& j, std::initializer_list<const char*> keys) {
    const json* cur = &j;
    for (const char* k : keys) {
        if (!cur->is_object() || !cur->contains(k)) return nullptr;
        cur = &(*cur)[k];
    }
    return cur->is_null() ? nullptr : cur;
}

std::string field_name(std::initializer_list<const char*> keys) {
    std::string out;
    for (const char* k : keys) out += (out.empty() ? "" : ".") + std::string(k);
    return out;
}

std::optional<std::string> get_string(const json& j, std::initializer_list<const char*> keys) {
    const json* v = at_path(j, keys);
    if (!v) return std::nullopt;
    if (!v->is_string()) config_error(field_name(keys), "expected a string");
    return v->get<std::string>();
}

std::optional<double> get_number(const json& j, std::initializer_list<const char*> keys) {
    const json* v = at_path(j, keys);
    if (!v) return std::nullopt;
    if (!v->is_number()) config_error(field_name(keys), "expected a number");
    return v->get<double>();
}

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_relative() ? (base / path).lexically_normal() : path;
}

int parse_port(const std::string& field, const std::string& s) {
    int v = 0;
    try {
        std::size_t used = 0;
        v = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
    } catch (const std::exception&) {
        config_error(field, "not an integer: " + s);
    }
    if (v < 0 || v > 65535) config_error(field, "out of range 0..65535");
    return v;
}

TransportMode parse_mode(const std::string& field, const std::string& s) {
    auto m = transport_mode_from_string(s);
    if (!m) config_error(field, "expected Live, Replay or RecordThenReplay, got " + s);
    return *m;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto t = trim(item);
        if (!t.empty()) out.emplace_back(t);
    }
    return out;
}

std::string dump(const json& j) {
    return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

Reply malformed(const std::string& param, const std::string& problem) {
    return error_reply(Error(ErrorCode::MalformedRequest, param + ": " + problem, {{"param", param}, {"problem", problem}}));
}

}  // namespace

std::optional<std::string> process_env(const std::string& name) {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
}

ServiceConfig parse_service_config(const json& j, const fs::path& base, const EnvLookup& env) {
    if (!j.is_object()) config_error("(root)", "expected a JSON object");
    ServiceConfig c;

    if (auto v = get_string(j, {"listen", "host"})) c.host = *v;
    if (auto v = get_number(j, {"listen", "port"})) c.port = parse_port("listen.port", std::to_string(static_cast<long long>(*v)));
    if (auto v = get_number(j, {"listen", "threads"})) c.threads = std::max(1, static_cast<int>(*v));
    if (auto v = get_number(j, {"listen", "max_body_bytes"})) c.max_body_bytes = static_cast<std::size_t>(std::max(1024.0, *v));

    if (auto v = get_string(j, {"transport", "mode"})) c.transport_mode = parse_mode("transport.mode", *v);
    if (auto v = get_string(j, {"transport", "upstream"})) c.upstream = *v;
    if (auto v = get_string(j, {"transport", "fixture_dir"})) c.fixture_dir = resolve(base, *v);
    if (auto v = get_number(j, {"transport", "rate_limit"})) c.rate_limit = *v;
    if (auto v = get_number(j, {"transport", "timeout_s"})) c.timeout = std::chrono::seconds(static_cast<long>(*v));

    if (auto v = get_string(j, {"data", "gazetteer"})) c.gazetteer = resolve(base, *v);
    if (auto v = get_string(j, {"data", "providers"})) c.providers = resolve(base, *v);
    if (auto v = get_string(j, {"data", "coverage"})) c.coverage = resolve(base, *v);
    if (auto v = get_string(j, {"corpus", "snapshot_dir"})) c.corpus_dir = resolve(base, *v);
    if (auto v = get_string(j, {"figures", "dir"})) c.figure_dir = resolve(base, *v);

    if (auto v = get_string(j, {"web", "kind"})) c.web = *v;
    if (auto v = get_string(j, {"web", "fixtures"})) c.web_fixtures = resolve(base, *v);
    if (auto v = get_string(j, {"web", "endpoint"})) c.web_endpoint = *v;
    std::string web_key_env = get_string(j, {"web", "api_key_env"}).value_or("OCEANQA_WEB_API_KEY");

    std::string model_key_env = "OCEANQA_MODEL_API_KEY";
    if (at_path(j, {"model"})) {
        ModelConfig m;
        m.base_url = get_string(j, {"model", "base_url"}).value_or("");
        m.model = get_string(j, {"model", "name"}).value_or("");
        if (auto v = get_number(j, {"model", "timeout_s"})) m.timeout = std::chrono::seconds(static_cast<long>(*v));
        model_key_env = get_string(j, {"model", "api_key_env"}).value_or(model_key_env);
        c.model = m;
    }

    if (const json* o = at_path(j, {"cors", "origins"})) {
        if (!o->is_array()) config_error("cors.origins", "expected an array of strings");
        for (const auto& s : *o) {
            if (!s.is_string()) config_error("cors.origins", "expected an array of strings");
            c.cors_origins.push_back(s.get<std::string>());
        }
    }
    std::optional<std::string> clock = get_string(j, {"clock"});

    // environment overrides; paths relative to the working directory
    const fs::path cwd = fs::current_path();
    auto path_env = [&](const char* name, fs::path& dst) {
        if (auto v = env(name)) dst = resolve(cwd, *v);
    };
    if (auto v = env("OCEANQA_HOST")) c.host = *v;
    if (auto v = env("OCEANQA_PORT")) c.port = parse_port("OCEANQA_PORT", *v);
    if (auto v = env("OCEANQA_TRANSPORT")) c.transport_mode = parse_mode("OCEANQA_TRANSPORT", *v);
    if (auto v = env("OCEANQA_UPSTREAM")) c.upstream = *v;
    path_env("OCEANQA_FIXTURE_DIR", c.fixture_dir);
    path_env("OCEANQA_GAZETTEER", c.gazetteer);
    path_env("OCEANQA_PROVIDERS", c.providers);
    path_env("OCEANQA_COVERAGE", c.coverage);
    path_env("OCEANQA_CORPUS_DIR", c.corpus_dir);
    path_env("OCEANQA_FIGURE_DIR", c.figure_dir);
    if (auto v = env("OCEANQA_WEB")) c.web = *v;
    path_env("OCEANQA_WEB_FIXTURES", c.web_fixtures);
    if (auto v = env(web_key_env)) c.web_api_key = *v;
    if (auto v = env("OCEANQA_MODEL_BASE_URL")) {
        if (!c.model) c.model = ModelConfig{};
        c.model->base_url = *v;
    }
    if (auto v = env("OCEANQA_MODEL")) {
        if (!c.model) c.model = ModelConfig{};
        c.model->model = *v;
    }
    if (c.model) {
        if (auto v = env(model_key_env)) c.model->api_key = *v;
        if (c.model->base_url.empty()) c.model.reset();
        else if (c.model->model.empty()) config_error("model.name", "required when model.base_url is set");
    }
    if (auto v = env("OCEANQA_CORS_ORIGINS")) c.cors_origins = split_list(*v);
    if (auto v = env("OCEANQA_CLOCK")) clock = *v;

    if (clock && *clock != "system") {
        auto ts = parse_timestamp(*clock);
        if (!ts) config_error("clock", "expected \"system\" or an ISO-8601 timestamp, got " + *clock);
        c.clock = *ts;
    }
    if (c.upstream != "noaa" && c.upstream != "synthetic") config_error("transport.upstream", "expected noaa or synthetic, got " + c.upstream);
    if (c.web != "stub" && c.web != "brave" && c.web != "none") config_error("web.kind", "expected stub, brave or none, got " + c.web);
    if (c.rate_limit <= 0) config_error("transport.rate_limit", "must be positive");
    return c;
}

ServiceConfig load_service_config(const fs::path& path, const EnvLookup& env) {
    std::ifstream in(path);
    if (!in) config_error("config", "cannot read " + path.string(), {{"path", path.string()}});
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        config_error("config", std::string("invalid JSON: ") + e.what(), {{"path", path.string()}});
    }
    auto base = fs::absolute(path).parent_path();
    return parse_service_config(j, base, env);
}

void check_paths(const ServiceConfig& c) {
    auto need = [](const char* field, const fs::path& p, bool dir) {
        if (p.empty()) config_error(field, "is required");
        if (!fs::exists(p)) config_error(field, "path does not exist: " + p.string(), {{"path", p.string()}});
        if (dir != fs::is_directory(p)) config_error(field, std::string("expected a ") + (dir ? "directory" : "file") + ": " + p.string(), {{"path", p.string()}});
    };
    need("data.gazetteer", c.gazetteer, false);
    need("data.providers", c.providers, false);
    need("data.coverage", c.coverage, false);
    need("corpus.snapshot_dir", c.corpus_dir, true);
    if (!fs::exists(c.corpus_dir / "snapshot.json") && !fs::exists(c.corpus_dir / "log.jsonl"))
        config_error("corpus.snapshot_dir", "no snapshot.json in " + c.corpus_dir.string() + " (run `oceanqa ingest`)", {{"path", c.corpus_dir.string()}});
    if (c.transport_mode == TransportMode::Replay) need("transport.fixture_dir", c.fixture_dir, true);
    else if (c.fixture_dir.empty()) config_error("transport.fixture_dir", "is required");
    if (c.figure_dir.empty()) config_error("figures.dir", "is required");
    if (c.web == "stub") need("web.fixtures", c.web_fixtures, false);
    if (c.web == "brave" && c.web_api_key.empty()) config_error("web.api_key_env", "brave web search needs an API key");
}

std::unique_ptr<App> App::build(const ServiceConfig& cfg, HttpFetcher upstream, std::shared_ptr<const ModelClient> model) {
    check_paths(cfg);
    std::unique_ptr<App> app(new App());
    app->cfg_ = cfg;
    if (!upstream) {
        if (cfg.upstream == "synthetic" && cfg.transport_mode != TransportMode::Replay)
            config_error("transport.upstream", "the synthetic upstream is only available from the oceanqa tool");
        upstream = default_http_fetcher();
    }
    std::error_code ec;
    fs::create_directories(cfg.figure_dir, ec);
    if (ec) config_error("figures.dir", "cannot create " + cfg.figure_dir.string() + ": " + ec.message(), {{"path", cfg.figure_dir.string()}});

    const App* self = app.get();
    Clock clock = [self] { return self->now(); };
    TransportConfig tc{cfg.transport_mode, cfg.fixture_dir, cfg.rate_limit, cfg.timeout};
    app->transport_ = std::make_shared<Transport>(tc, std::move(upstream), clock);
    app->gazetteer_ = std::make_shared<const Gazetteer>(Gazetteer::load(cfg.gazetteer));
    app->clients_ = std::make_shared<const NoaaClients>(app->transport_, ProviderConfig::load(cfg.providers), CoverageTable::load(cfg.coverage));
    app->figures_ = std::make_shared<FigureStore>(cfg.figure_dir);
    app->docs_ = std::make_shared<DocStore>(std::make_shared<HashingEmbedder>(), cfg.corpus_dir);
    if (cfg.web == "stub") app->web_ = std::make_shared<StubWebSearch>(StubWebSearch::load(cfg.web_fixtures));
    else if (cfg.web == "brave") app->web_ = std::make_shared<BraveWebSearch>(cfg.web_endpoint, cfg.web_api_key);
    if (model) app->model_ = std::move(model);
    else if (cfg.model) app->model_ = std::make_shared<HttpModelClient>(*cfg.model);

    app->registry_ = std::make_unique<Registry>(default_registry({app->gazetteer_, app->clients_, app->figures_, app->docs_}));
    OrchestratorDeps d;
    d.registry = app->registry_.get();
    d.gazetteer = app->gazetteer_;
    d.figures = app->figures_.get();
    d.docs = app->docs_;
    d.web = app->web_;
    d.model = app->model_;
    d.now = clock;
    app->orchestrator_ = std::make_unique<Orchestrator>(std::move(d));
    return app;
}

Timestamp App::now() const {
    return cfg_.clock ? *cfg_.clock : system_now();
}

int http_status(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::MalformedRequest: return 400;
        case ErrorCode::NotFound: return 404;
        case ErrorCode::UnknownLocation:
        case ErrorCode::AmbiguousTime:
        case ErrorCode::UnsupportedIntent:
        case ErrorCode::InvalidQuery:
        case ErrorCode::UnknownFunction:
        case ErrorCode::ArgValidation:
        case ErrorCode::EmptyRange:
        case ErrorCode::ResolutionMismatch:
        case ErrorCode::OutOfCoverage:
        case ErrorCode::UnitMismatch:
        case ErrorCode::InvalidValue: return 422;
        case ErrorCode::UpstreamFailure:
        case ErrorCode::StationUnknown:
        case ErrorCode::ProviderError:
        case ErrorCode::GapOnly:
        case ErrorCode::NoValidNode:
        case ErrorCode::FormatError:
        case ErrorCode::EmptySeries:
        case ErrorCode::InsufficientData:
        case ErrorCode::DegenerateTime:
        case ErrorCode::MissingBaselineEntry:
        case ErrorCode::FullyMasked:
        case ErrorCode::EmptyDocument:
        case ErrorCode::EmptyStore:
        case ErrorCode::ProviderUnavailable: return 502;
        case ErrorCode::ModelUnavailable: return 503;
        default: return 500;
    }
}

Reply error_reply(const Error& e) {
    return {http_status(e.code()), dump({{"error", e.to_json()}}), "application/json"};
}

Service::Service(const App& app) : app_(app) {}

Reply Service::query(const std::string& body) const {
    json req;
    try {
        req = json::parse(body);
    } catch (const json::parse_error& e) {
        return malformed("body", fmt::format("not valid JSON (byte {})", e.byte));
    }
    if (!req.is_object()) return malformed("body", "expected a JSON object with a \"text\" field");
    for (const auto& [k, v] : req.items())
        if (k != "text" && k != "mode")
            return k.empty() ? malformed("body", "empty field name; expected text and optional mode")
                             : malformed(k, "unknown field; expected text and optional mode");
    if (!req.contains("text")) return malformed("text", "is required");
    if (!req["text"].is_string()) return malformed("text", "must be a string");
    const auto text = req["text"].get<std::string>();
    if (trim(text).empty()) return malformed("text", "must not be empty");
    if (text.size() > kMaxQueryText) return malformed("text", fmt::format("longer than {} bytes", kMaxQueryText));
    Mode mode = Mode::Deterministic;
    if (req.contains("mode") && !req["mode"].is_null()) {
        std::optional<Mode> m;
        if (req["mode"].is_string()) m = mode_from_string(req["mode"].get<std::string>());
        if (!m) return malformed("mode", "expected \"Deterministic\" or \"ModelBacked\"");
        mode = *m;
    }
    try {
        return {200, dump(encode(app_.orchestrator().run_turn(text, mode))), "application/json"};
    } catch (const Error& e) {
        if (http_status(e.code()) >= 500 && e.code() != ErrorCode::UpstreamFailure)
            spdlog::warn("query failed with {}: {}", to_string(e.code()), e.what());
        return error_reply(e);
    } catch (const std::exception& e) {
        spdlog::error("query failed: {}", e.what());
        return error_reply(Error(ErrorCode::Internal, "internal error", {{"cause", e.what()}}));
    }
}

Reply Service::functions() const {
    return {200, dump(app_.registry().emit_function_schemas()), "application/json"};
}

Reply Service::health() const {
    json j = {{"status", "ok"},
              {"transport_mode", std::string(to_string(app_.transport().mode()))},
              {"corpus_size", app_.docs().size()},
              {"fixtures", app_.transport().store().size()},
              {"functions", app_.registry().size()},
              {"web", app_.config().web},
              {"model_backed", app_.orchestrator().model_available()}};
    return {200, dump(j), "application/json"};
}

Reply Service::figure(const std::string& name) const {
    std::string hash = name;
    if (hash.size() > 4 && hash.ends_with(".svg")) hash.resize(hash.size() - 4);
    if (auto svg = app_.figures().read(hash)) return {200, *svg, "image/svg+xml"};
    return error_reply(Error(ErrorCode::NotFound, "no figure " + name, {{"param", "hash"}, {"hash", name}}));
}

std::vector<std::pair<std::string, std::string>> Service::cors_headers(const std::string& origin) const {
    const auto& allowed = app_.config().cors_origins;
    const bool any = std::find(allowed.begin(), allowed.end(), "*") != allowed.end();
    if (origin.empty() || (!any && std::find(allowed.begin(), allowed.end(), origin) == allowed.end())) return {};
    return {{"Access-Control-Allow-Origin", any ? "*" : origin},
            {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
            {"Access-Control-Allow-Headers", "Content-Type"},
            {"Vary", "Origin"}};
}

struct HttpServer::Impl {
    explicit Impl(const App& app) : service(app) {}
    Service service;
    httplib::Server server;
};

namespace {

void send(httplib::Response& res, const Reply& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
}

}  // namespace

HttpServer::HttpServer(const App& app) : impl_(std::make_unique<Impl>(app)) {
    auto& svr = impl_->server;
    const Service& svc = impl_->service;
    const int threads = app.config().threads;
    svr.new_task_queue = [threads] { return new httplib::ThreadPool(static_cast<std::size_t>(threads)); };
    svr.set_payload_max_length(app.config().max_body_bytes);

    svr.Post("/api/query", [&svc](const httplib::Request& req, httplib::Response& res) { send(res, svc.query(req.body)); });
    svr.Get("/api/functions", [&svc](const httplib::Request&, httplib::Response& res) { send(res, svc.functions()); });
    svr.Get("/api/health", [&svc](const httplib::Request&, httplib::Response& res) { send(res, svc.health()); });
    svr.Get(R"(/figures/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) { send(res, svc.figure(req.matches[1])); });
    svr.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    svr.set_post_routing_handler([&svc](const httplib::Request& req, httplib::Response& res) {
        for (auto& [k, v] : svc.cors_headers(req.get_header_value("Origin"))) res.set_header(k, v);
    });
    svr.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "unknown exception";
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            what = e.what();
        } catch (...) {
        }
        spdlog::error("handler threw: {}", what);
        send(res, error_reply(Error(ErrorCode::Internal, "internal error", {{"cause", what}})));
    });
    const std::size_t limit = app.config().max_body_bytes;
    svr.set_error_handler([limit](const httplib::Request& req, httplib::Response& res) {
        if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
        Reply r;
        if (res.status == 404)
            r = error_reply(Error(ErrorCode::NotFound, "no route for " + req.method + " " + req.path, {{"param", "path"}, {"path", req.path}}));
        else if (res.status == 413)
            r = malformed("body", fmt::format("larger than {} bytes", limit));
        else if (res.status < 500)
            r = malformed("request", fmt::format("rejected by the HTTP layer ({})", res.status));
        else
            r = error_reply(Error(ErrorCode::Internal, "internal error"));
        const int status = res.status;
        send(res, r);
        res.status = status;
        return httplib::Server::HandlerResponse::Handled;
    });
    svr.set_logger([](const httplib::Request& req, const httplib::Response& res) {
        spdlog::info("{} {} -> {}", req.method, req.path, res.status);
    });
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
    int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (bound <= 0) config_error("listen", fmt::format("cannot bind {}:{}", host, port), {{"host", host}, {"port", port}});
    return bound;
}

void HttpServer::run() {
    impl_->server.listen_after_bind();
}

void HttpServer::stop() {
    impl_->server.stop();
}

}  // namespace oceanqa
