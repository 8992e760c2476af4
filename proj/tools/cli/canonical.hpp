// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oceanqa/service.hpp"

namespace oceanqa::cli {

struct CanonicalQuery {
    std::string id;
    std::string text;
    std::string expect;  // empty: success; else the expected error code
};

struct CanonicalCall {
    std::string id;
    FunctionCall call;
    std::string expect;
};

struct Manifest {
    std::vector<CanonicalQuery> queries;
    std::vector<CanonicalCall> calls;
    static Manifest load(const std::filesystem::path& path);
};

/// The synthetic stand-in provider as a transport fetcher.
HttpFetcher synthetic_fetcher();

/// Runs every manifest entry once through `app` (Deterministic mode) and
/// reports {id, status, code?} per entry. An outcome differing from
/// `expect` is reported with ok=false.
nlohmann::json run_manifest(const App& app, const Manifest& m);

}  // namespace oceanqa::cli
