// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "oceanqa/gazetteer.hpp"
#include "oceanqa/intent.hpp"
#include "oceanqa/types.hpp"

namespace oceanqa {

class NoaaClients;
class FigureStore;
class DocStore;

enum class ParamType { Text, Integer, Number, Date, Enum, Station, Location, Region };

std::string_view to_string(ParamType t) noexcept;

struct ParamSpec {
    std::string name;
    ParamType type = ParamType::Text;
    bool required = true;
    std::vector<std::string> enum_domain;  // ParamType::Enum only
    std::string description;
    std::optional<nlohmann::json> default_value;
    std::optional<double> min;  // Integer / Number bounds, inclusive
    std::optional<double> max;
};

/// What a handler sees: the normalized arguments (defaults filled in,
/// dates as YYYY-MM-DD, stations as ids, locations and regions resolved).
struct CallContext {
    std::string function;
    nlohmann::json args;
    bool render = true;
};

using Handler = std::function<ToolResponse(const CallContext&)>;

struct FunctionDescriptor {
    std::string name;
    std::string summary;
    std::vector<ParamSpec> params;
    Handler handler;
};

struct FunctionCall {
    std::string name;
    nlohmann::json args = nlohmann::json::object();

    /// Accepts {name, arguments} where arguments is an object or a JSON
    /// string (the chat-completions tool_call shape), optionally wrapped in
    /// {"function": {...}}. Throws MalformedRequest.
    static FunctionCall from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct DispatchOptions {
    bool render = true;
};

/// Thrown inside handlers to reject an argument value the type check
/// could not catch (range order, coverage).
[[noreturn]] void reject_arg(const std::string& param, const std::string& problem);

class Registry {
public:
    explicit Registry(std::shared_ptr<const Gazetteer> gazetteer);

    /// Throws DuplicateName, or InvalidValue for a malformed descriptor.
    void add(FunctionDescriptor fd);
    const FunctionDescriptor* find(std::string_view name) const;
    /// Registration order. Params listed required-first.
    const std::vector<FunctionDescriptor>& list() const noexcept { return functions_; }
    std::size_t size() const noexcept { return functions_.size(); }

    /// Tools array for a chat-completions-with-tools endpoint.
    nlohmann::json emit_function_schemas() const;

    /// Normalized arguments, or ArgValidation listing every violation.
    nlohmann::json validate(const FunctionCall& call) const;

    /// Throws UnknownFunction, ArgValidation, UpstreamFailure or Internal;
    /// nothing else escapes.
    ToolResponse dispatch(const FunctionCall& call, DispatchOptions opts = {}) const;

    const Gazetteer& gazetteer() const noexcept { return *gazetteer_; }

private:
    std::shared_ptr<const Gazetteer> gazetteer_;
    std::vector<FunctionDescriptor> functions_;
};

nlohmann::json encode(const FunctionDescriptor& fd);

/// Deterministic lowering of a query to one call, or two for Compare.
std::vector<FunctionCall> lower(const StructuredQuery& q);

/// Dispatches the lowered calls (concurrently for Compare) and merges the
/// results in selector order. Compare output has json_data keyed by
/// location label, one overlay figure and per-location errors in
/// others.errors; it throws UpstreamFailure only when every sub-call fails.
ToolResponse dispatch_structured(const Registry& reg, const StructuredQuery& q, FigureStore* figures);

struct Backends {
    std::shared_ptr<const Gazetteer> gazetteer;
    std::shared_ptr<const NoaaClients> clients;
    std::shared_ptr<FigureStore> figures;     // null: no figures rendered
    std::shared_ptr<const DocStore> docs;     // null: search_documents fails upstream
};

/// get_water_level, get_monthly_mean_sea_level, get_cora_series, get_sst,
/// search_documents, in that order.
Registry default_registry(const Backends& b);

}  // namespace oceanqa
