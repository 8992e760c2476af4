// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "oceanqa/gazetteer.hpp"
#include "oceanqa/types.hpp"

namespace oceanqa {

enum class Stat { Max, Min, Mean, Std, FullSeries, Trend, Compare };

std::string_view to_string(Stat s) noexcept;
std::optional<Stat> stat_from_string(std::string_view s) noexcept;

struct StructuredQuery {
    Variable variable = Variable::WaterLevel;
    Stat stat = Stat::FullSeries;
    std::vector<SpatialSelector> selectors;
    std::vector<std::string> labels;  // display name per selector
    TimeRange time;
    std::optional<DatasetFamily> dataset_hint;
    std::optional<std::string> datum;
    std::vector<std::string> notes;  // interpretation choices, copied into processing_steps

    bool operator==(const StructuredQuery&) const = default;

    /// Throws InvalidQuery naming the violated field.
    void validate() const;
};

nlohmann::json encode(const StructuredQuery& q);
StructuredQuery decode_structured_query(const nlohmann::json& j);

/// Lower-cased word tokens; possessives dropped, ISO dates and hyphenated
/// words kept whole.
std::vector<std::string> tokenize(std::string_view text);

/// Finds the single time expression in `tokens`. Supports bare years,
/// month-year, ISO dates, "from X to Y", "between X and Y" and a few
/// relative forms anchored at `now`. The returned resolution is Hourly.
TimeRange resolve_time_expression(std::span<const std::string> tokens, Timestamp now);

/// Template grammar over keyword sets. Throws UnknownLocation,
/// AmbiguousTime, UnsupportedIntent or InvalidQuery.
StructuredQuery parse_query(std::string_view text, const Gazetteer& gz, Timestamp now);

}  // namespace oceanqa
