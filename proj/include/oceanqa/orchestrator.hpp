// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "oceanqa/dispatcher.hpp"
#include "oceanqa/error.hpp"
#include "oceanqa/intent.hpp"
#include "oceanqa/retrieval.hpp"
#include "oceanqa/types.hpp"

namespace oceanqa {

enum class Mode { Deterministic, ModelBacked };

std::string_view to_string(Mode m) noexcept;
std::optional<Mode> mode_from_string(std::string_view s) noexcept;

struct TurnPlan {
    bool run_web = true;
    bool run_docs = true;
    std::optional<StructuredQuery> structured;
    bool deferred = false;             // parser gave up; the model may call a tool
    std::optional<Error> parse_error;  // UnknownLocation / AmbiguousTime / InvalidQuery
};

TurnPlan plan(std::string_view user_text, const Gazetteer& gz, Timestamp now);

enum class CitationKind { Dataset, Document, Web };

struct Citation {
    CitationKind kind = CitationKind::Dataset;
    std::string identifier;
    std::string title;
    bool operator==(const Citation&) const = default;
};

struct Answer {
    std::string text;
    std::vector<FigureRef> figures;
    nlohmann::json data = nlohmann::json::object();
    std::vector<Citation> citations;
    std::vector<Provenance> provenance;
    Mode mode = Mode::Deterministic;
    nlohmann::json diagnostics = nlohmann::json::object();
};

/// `figure_prefix` turns store-relative figure paths into URLs.
nlohmann::json encode(const Answer& a, const std::string& figure_prefix = "/figures/");

/// Decimal literals in `text` (a digit run with a fractional part, not
/// glued to a preceding letter, as in "v3.1").
std::vector<std::string> decimal_literals(std::string_view text);

struct NumericCheck {
    bool ok = true;
    std::vector<std::string> offending;  // literals with no counterpart in the data
    std::vector<std::string> missing;    // queried values absent from the text
};

/// Every decimal literal in `text` must equal some scalar of `data`
/// (series arrays excluded) rendered at that literal's precision, and each
/// queried statistic must appear at two decimals.
NumericCheck check_numbers(std::string_view text, const nlohmann::json& data);

/// Chat-completions-with-tools endpoint: takes the request body, returns
/// the response body. Throws ModelUnavailable.
class ModelClient {
public:
    virtual ~ModelClient() = default;
    virtual nlohmann::json complete(const nlohmann::json& request) const = 0;
    virtual std::string model() const = 0;
};

struct ModelConfig {
    std::string base_url;  // .../v1
    std::string model;
    std::string api_key;
    std::chrono::seconds timeout{60};
};

class HttpModelClient final : public ModelClient {
public:
    using Post = std::function<std::pair<int, std::string>(const std::string& url, const std::string& body,
                                                           const std::string& api_key, std::chrono::seconds timeout)>;
    explicit HttpModelClient(ModelConfig cfg, Post post = {});
    nlohmann::json complete(const nlohmann::json& request) const override;
    std::string model() const override { return cfg_.model; }

private:
    ModelConfig cfg_;
    Post post_;
};

struct OrchestratorDeps {
    const Registry* registry = nullptr;
    std::shared_ptr<const Gazetteer> gazetteer;
    FigureStore* figures = nullptr;
    std::shared_ptr<const DocStore> docs;
    std::shared_ptr<const WebSearch> web;
    std::shared_ptr<const ModelClient> model;  // null: ModelBacked unavailable
    std::function<Timestamp()> now;             // anchors relative time expressions
    std::size_t doc_k = 3;
    std::size_t web_k = 3;
};

class Orchestrator {
public:
    explicit Orchestrator(OrchestratorDeps deps);

    /// Throws the parser's UnknownLocation / AmbiguousTime / InvalidQuery,
    /// ArgValidation or UpstreamFailure (details.partial carries the
    /// retrieval-only answer), or ModelUnavailable when ModelBacked is
    /// requested without a model.
    Answer run_turn(std::string_view user_text, Mode mode) const;

    bool model_available() const noexcept { return deps_.model != nullptr; }

private:
    Answer deterministic(const std::string& text, const TurnPlan& p) const;
    Answer model_backed(const std::string& text, const TurnPlan& p) const;

    OrchestratorDeps deps_;
};

/// The template text for a tool result plus source list.
std::string synthesize(const ToolResponse* tr, const std::vector<Citation>& citations, const std::vector<std::string>& degraded);

}  // namespace oceanqa
