// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oceanqa/types.hpp"

// JSON encoding for the core types. Decoders throw Error(InvalidValue) with
// the offending field path in details.

namespace oceanqa {

using nlohmann::json;

json encode(Timestamp ts);
json encode(const TimeRange& tr);
json encode(const SpatialSelector& sel);
json encode(const Station& st);
json encode(const Series& s);
json encode(const GridSlice& g);
json encode(const SummaryStats& s);
json encode(const Provenance& p);
json encode(const FigureRef& f);
json encode(const ToolResponse& r);

Timestamp decode_timestamp(const json& j);
TimeRange decode_time_range(const json& j);
SpatialSelector decode_selector(const json& j);
Station decode_station(const json& j);
Series decode_series(const json& j);
GridSlice decode_grid(const json& j);
SummaryStats decode_summary_stats(const json& j);
Provenance decode_provenance(const json& j);
FigureRef decode_figure(const json& j);
ToolResponse decode_tool_response(const json& j);

std::string_view to_string(FigureKind k) noexcept;

/// Machine-checkable schema validation of a serialized ToolResponse.
/// Returns one message per violated invariant; empty means valid.
std::vector<std::string> validate_tool_response(const json& j);

}  // namespace oceanqa
