// SPDX-License-Identifier: Apache-2.0
#include "cli/canonical.hpp"

#include <fstream>

#include "synth/synthetic_provider.hpp"

namespace oceanqa::cli {

using nlohmann::json;

Manifest Manifest::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot read " + path.string(), {{"path", path.string()}});
    json j;
    try {
        j = json::parse(in);
        Manifest m;
        for (const auto& q : j.at("queries")) m.queries.push_back({q.at("id"), q.at("text"), q.value("expect", "")});
        for (const auto& c : j.value("calls", json::array()))
            m.calls.push_back({c.at("id"), FunctionCall::from_json(c.at("call")), c.value("expect", "")});
        return m;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("malformed manifest: ") + e.what(), {{"path", path.string()}});
    }
}

HttpFetcher synthetic_fetcher() {
    return [provider = synth::SyntheticProvider()](const std::string& url, std::chrono::seconds timeout) { return provider(url, timeout); };
}

json run_manifest(const App& app, const Manifest& m) {
    json report = json::array();
    auto record = [&](const std::string& id, const std::string& expect, const std::function<void()>& f) {
        std::string got;
        try {
            f();
        } catch (const Error& e) {
            got = std::string(to_string(e.code()));
        }
        json r = {{"id", id}, {"outcome", got.empty() ? "ok" : got}, {"ok", got == expect}};
        report.push_back(r);
    };
    for (const auto& q : m.queries) record(q.id, q.expect, [&] { app.orchestrator().run_turn(q.text, Mode::Deterministic); });
    for (const auto& c : m.calls) record(c.id, c.expect, [&] { app.registry().dispatch(c.call, {false}); });
    return report;
}

}  // namespace oceanqa::cli
