// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "oceanqa/time.hpp"
#include "oceanqa/units.hpp"

namespace oceanqa {

enum class Variable { WaterLevel, MonthlyMeanSeaLevel, CoraZeta, SeaSurfaceTemperature };

/// The four provider families behind the function-calling interface.
enum class DatasetFamily { CoOpsRealtime, CoOpsMonthly, Cora, Crw };

enum class Resolution { SixMinute, Hourly, Daily, Monthly };

std::string_view to_string(Variable v) noexcept;
std::string_view to_string(DatasetFamily f) noexcept;
std::string_view to_string(Resolution r) noexcept;
std::optional<Variable> variable_from_string(std::string_view s) noexcept;
std::optional<DatasetFamily> dataset_family_from_string(std::string_view s) noexcept;
std::optional<Resolution> resolution_from_string(std::string_view s) noexcept;

DatasetFamily dataset_family(Variable v) noexcept;
Unit canonical_unit(Variable v) noexcept;
bool resolution_allowed(Variable v, Resolution r) noexcept;

inline constexpr std::string_view kDefaultDatum = "MSL";

struct Station {
    std::string id;
    std::string name;
    double lat = 0.0;
    double lon = 0.0;
    std::vector<std::string> supported_datums;

    /// Throws InvalidValue naming the offending field.
    void validate(bool tide_station = true) const;
    bool supports_datum(std::string_view datum) const;
};

struct StationRef {
    std::string id;
    bool operator==(const StationRef&) const = default;
};

struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;
    bool operator==(const GeoPoint&) const = default;
};

struct BBox {
    double lat_min = 0.0;
    double lat_max = 0.0;
    double lon_min = 0.0;
    double lon_max = 0.0;
    bool operator==(const BBox&) const = default;

    void validate() const;
    bool contains(double lat, double lon) const noexcept {
        return lat >= lat_min && lat <= lat_max && lon >= lon_min && lon <= lon_max;
    }
};

struct NamedRegion {
    std::string key;
    bool operator==(const NamedRegion&) const = default;
};

using SpatialSelector = std::variant<StationRef, GeoPoint, BBox, NamedRegion>;

std::string describe(const SpatialSelector& sel);

struct TimeRange {
    Timestamp start{};
    Timestamp end{};
    Resolution resolution = Resolution::Hourly;
    bool operator==(const TimeRange&) const = default;
};

/// A timestamped observation sequence. Missing entries are carried in an
/// explicit validity mask; the stored value at a masked index is meaningless.
class Series {
public:
    Series(Variable variable, Unit unit, std::optional<std::string> datum, std::vector<Timestamp> timestamps,
           std::vector<double> values, std::vector<std::uint8_t> valid);

    Variable variable() const noexcept { return variable_; }
    Unit unit() const noexcept { return unit_; }
    const std::optional<std::string>& datum() const noexcept { return datum_; }
    std::size_t size() const noexcept { return timestamps_.size(); }
    bool empty() const noexcept { return timestamps_.empty(); }
    std::span<const Timestamp> timestamps() const noexcept { return timestamps_; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<const std::uint8_t> valid_mask() const noexcept { return valid_; }
    bool valid(std::size_t i) const noexcept { return valid_[i] != 0; }
    std::optional<double> at(std::size_t i) const {
        return valid_[i] ? std::optional<double>(values_[i]) : std::nullopt;
    }
    std::size_t valid_count() const noexcept;

    bool operator==(const Series& other) const;

private:
    Variable variable_;
    Unit unit_;
    std::optional<std::string> datum_;
    std::vector<Timestamp> timestamps_;
    std::vector<double> values_;
    std::vector<std::uint8_t> valid_;
};

/// Row-major (lat-major) 2-D field for one instant, with a validity mask.
class GridSlice {
public:
    GridSlice(Variable variable, Unit unit, Timestamp timestamp, std::vector<double> lats, std::vector<double> lons,
              std::vector<double> values, std::vector<std::uint8_t> valid);

    Variable variable() const noexcept { return variable_; }
    Unit unit() const noexcept { return unit_; }
    Timestamp timestamp() const noexcept { return timestamp_; }
    std::span<const double> lats() const noexcept { return lats_; }
    std::span<const double> lons() const noexcept { return lons_; }
    std::size_t rows() const noexcept { return lats_.size(); }
    std::size_t cols() const noexcept { return lons_.size(); }
    std::size_t cell_count() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    std::span<const std::uint8_t> valid_mask() const noexcept { return valid_; }
    double value(std::size_t row, std::size_t col) const noexcept { return values_[row * lons_.size() + col]; }
    bool valid(std::size_t row, std::size_t col) const noexcept { return valid_[row * lons_.size() + col] != 0; }
    std::size_t valid_count() const noexcept;

    bool operator==(const GridSlice& other) const;

private:
    Variable variable_;
    Unit unit_;
    Timestamp timestamp_;
    std::vector<double> lats_;
    std::vector<double> lons_;
    std::vector<double> values_;
    std::vector<std::uint8_t> valid_;
};

struct SummaryStats {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double std = 0.0;
    Timestamp argmin_time{};
    Timestamp argmax_time{};
    std::size_t count = 0;
    bool operator==(const SummaryStats&) const = default;
};

struct Provenance {
    std::string source_name;
    std::string dataset_id;
    std::string station_or_grid;
    std::string unit;
    std::optional<std::string> datum;
    TimeRange time_span;
    Timestamp retrieved_at{};
    std::vector<std::string> processing_steps;
    bool operator==(const Provenance&) const = default;
};

enum class FigureKind { TimeSeries, Map };

struct FigureRef {
    std::string hash;
    std::string path;
    std::string alt_text;
    FigureKind kind = FigureKind::TimeSeries;
    bool operator==(const FigureRef&) const = default;
};

/// The standardized four-field payload every function returns.
struct ToolResponse {
    std::string text;
    std::vector<FigureRef> images;
    nlohmann::json json_data = nlohmann::json::object();
    nlohmann::json others = nlohmann::json::object();
    bool operator==(const ToolResponse&) const = default;
};

}  // namespace oceanqa
