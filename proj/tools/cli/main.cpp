// SPDX-License-Identifier: Apache-2.0
#include <csignal>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "cli/canonical.hpp"
#include "oceanqa/serialization.hpp"
#include "oceanqa/service.hpp"

namespace fs = std::filesystem;
using namespace oceanqa;
using nlohmann::json;

namespace {

HttpServer* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

fs::path default_config() {
    if (auto v = process_env("OCEANQA_CONFIG")) return *v;
    if (fs::exists("config/service.json")) return "config/service.json";
    return fs::path(OCEANQA_SOURCE_DIR) / "config" / "service.json";
}

std::unique_ptr<App> make_app(const ServiceConfig& cfg) {
    return App::build(cfg, cfg.upstream == "synthetic" ? cli::synthetic_fetcher() : HttpFetcher{});
}

int exit_code_for(const Error& e) {
    return http_status(e.code()) < 500 ? 2 : 3;
}

void print_answer(const App& app, const Answer& a) {
    std::cout << a.text << "\n";
    if (!a.figures.empty()) {
        std::cout << "\nfigures:\n";
        for (const auto& f : a.figures) std::cout << "  " << (app.figures().dir() / f.path).string() << "\n";
    }
    if (!a.provenance.empty()) {
        std::cout << "\nprovenance:\n";
        for (const auto& p : a.provenance) {
            std::cout << fmt::format("  {} / {} / {} [{} .. {}], retrieved {}\n", p.source_name, p.dataset_id, p.station_or_grid,
                                     format_iso(p.time_span.start), format_iso(p.time_span.end), format_iso(p.retrieved_at));
            for (const auto& s : p.processing_steps) std::cout << "    - " << s << "\n";
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{"Grounded ocean question answering over NOAA data products"};
    cli.require_subcommand(1);
    std::string config_path = default_config().string();
    bool verbose = false;
    cli.add_option("-c,--config", config_path, "service config file")->capture_default_str();
    cli.add_flag("-v,--verbose", verbose, "log at debug level");

    auto* serve = cli.add_subcommand("serve", "run the HTTP service");
    std::string host;
    int port = -1;
    serve->add_option("--host", host, "listen address (overrides config)");
    serve->add_option("--port", port, "listen port (overrides config)")->check(CLI::Range(0, 65535));

    auto* query = cli.add_subcommand("query", "run one turn and print the answer");
    std::string text;
    std::string mode_name = "Deterministic";
    bool as_json = false;
    query->add_option("text", text, "the question")->required();
    query->add_option("-m,--mode", mode_name, "Deterministic or ModelBacked")->capture_default_str();
    query->add_flag("--json", as_json, "print the serialized answer");

    auto* functions = cli.add_subcommand("functions", "print the function schemas");

    auto* ingest = cli.add_subcommand("ingest", "build the document store snapshot from a corpus directory");
    std::string corpus_dir = (fs::path(OCEANQA_SOURCE_DIR) / "data" / "corpus").string();
    std::string store_dir;
    ingest->add_option("--corpus", corpus_dir, "directory of *.txt with sibling *.json metadata")->capture_default_str();
    ingest->add_option("--store", store_dir, "snapshot directory (default: corpus.snapshot_dir from config)");

    auto* record = cli.add_subcommand("record", "record transport fixtures for the canonical queries");
    std::string manifest_path = (fs::path(OCEANQA_SOURCE_DIR) / "data" / "canonical_queries.json").string();
    std::string out_dir;
    std::string upstream = "synthetic";
    record->add_option("--manifest", manifest_path, "canonical query manifest")->capture_default_str();
    record->add_option("--out", out_dir, "fixture directory (default: transport.fixture_dir from config)");
    record->add_option("--upstream", upstream, "noaa or synthetic")->check(CLI::IsMember({"noaa", "synthetic"}))->capture_default_str();

    CLI11_PARSE(cli, argc, argv);
    spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::warn);

    try {
        ServiceConfig cfg;
        if (!ingest->parsed()) cfg = load_service_config(config_path);

        if (serve->parsed()) {
            spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);
            if (!host.empty()) cfg.host = host;
            if (port >= 0) cfg.port = port;
            auto app = make_app(cfg);
            HttpServer server(*app);
            const int bound = server.bind(cfg.host, cfg.port);
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            spdlog::info("listening on http://{}:{} (transport {}, {} chunks)", cfg.host, bound, to_string(cfg.transport_mode), app->docs().size());
            server.run();
            g_server = nullptr;
            return 0;
        }
        if (query->parsed()) {
            auto mode = mode_from_string(mode_name);
            if (!mode) {
                std::cerr << "unknown mode " << mode_name << " (expected Deterministic or ModelBacked)\n";
                return 2;
            }
            auto app = make_app(cfg);
            auto answer = app->orchestrator().run_turn(text, *mode);
            if (as_json) std::cout << encode(answer).dump(2) << "\n";
            else print_answer(*app, answer);
            return 0;
        }
        if (functions->parsed()) {
            auto app = make_app(cfg);
            std::cout << app->registry().emit_function_schemas().dump(2) << "\n";
            return 0;
        }
        if (ingest->parsed()) {
            if (store_dir.empty()) store_dir = load_service_config(config_path).corpus_dir.string();
            DocStore store(std::make_shared<HashingEmbedder>(), fs::path(store_dir));
            store.ingest_directory(corpus_dir);
            store.compact();
            std::cout << fmt::format("{} chunks in {}\n", store.size(), store_dir);
            return 0;
        }
        if (record->parsed()) {
            cfg.transport_mode = TransportMode::RecordThenReplay;
            cfg.upstream = upstream;
            if (!out_dir.empty()) cfg.fixture_dir = out_dir;
            fs::create_directories(cfg.fixture_dir);
            auto app = make_app(cfg);
            auto report = cli::run_manifest(*app, cli::Manifest::load(manifest_path));
            bool all_ok = true;
            for (const auto& r : report) {
                all_ok &= r["ok"].get<bool>();
                std::cout << fmt::format("{:<40} {}{}\n", r["id"].get<std::string>(), r["outcome"].get<std::string>(), r["ok"].get<bool>() ? "" : "  (unexpected)");
            }
            std::cout << fmt::format("{} fixtures in {}\n", app->transport().store().size(), cfg.fixture_dir.string());
            return all_ok ? 0 : 1;
        }
    } catch (const Error& e) {
        std::cerr << json({{"error", e.to_json()}}).dump(2, ' ', false, json::error_handler_t::replace) << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
