// SPDX-License-Identifier: Apache-2.0
#include "oceanqa/types.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "oceanqa/error.hpp"

namespace oceanqa {

std::string_view to_string(Variable v) noexcept {
    switch (v) {
        case Variable::WaterLevel: return "WaterLevel";
        case Variable::MonthlyMeanSeaLevel: return "MonthlyMeanSeaLevel";
        case Variable::CoraZeta: return "CoraZeta";
        case Variable::SeaSurfaceTemperature: return "SeaSurfaceTemperature";
    }
    return "WaterLevel";
}

std::string_view to_string(DatasetFamily f) noexcept {
    switch (f) {
        case DatasetFamily::CoOpsRealtime: return "CoOpsRealtime";
        case DatasetFamily::CoOpsMonthly: return "CoOpsMonthly";
        case DatasetFamily::Cora: return "Cora";
        case DatasetFamily::Crw: return "Crw";
    }
    return "CoOpsRealtime";
}

std::string_view to_string(Resolution r) noexcept {
    switch (r) {
        case Resolution::SixMinute: return "SixMinute";
        case Resolution::Hourly: return "Hourly";
        case Resolution::Daily: return "Daily";
        case Resolution::Monthly: return "Monthly";
    }
    return "Hourly";
}

std::optional<Variable> variable_from_string(std::string_view s) noexcept {
    for (auto v : {Variable::WaterLevel, Variable::MonthlyMeanSeaLevel, Variable::CoraZeta,
                   Variable::SeaSurfaceTemperature})
        if (to_string(v) == s) return v;
    return std::nullopt;
}

std::optional<DatasetFamily> dataset_family_from_string(std::string_view s) noexcept {
    for (auto f : {DatasetFamily::CoOpsRealtime, DatasetFamily::CoOpsMonthly, DatasetFamily::Cora, DatasetFamily::Crw})
        if (to_string(f) == s) return f;
    return std::nullopt;
}

std::optional<Resolution> resolution_from_string(std::string_view s) noexcept {
    for (auto r : {Resolution::SixMinute, Resolution::Hourly, Resolution::Daily, Resolution::Monthly})
        if (to_string(r) == s) return r;
    return std::nullopt;
}

DatasetFamily dataset_family(Variable v) noexcept {
    switch (v) {
        case Variable::WaterLevel: return DatasetFamily::CoOpsRealtime;
        case Variable::MonthlyMeanSeaLevel: return DatasetFamily::CoOpsMonthly;
        case Variable::CoraZeta: return DatasetFamily::Cora;
        case Variable::SeaSurfaceTemperature: return DatasetFamily::Crw;
    }
    return DatasetFamily::CoOpsRealtime;
}

Unit canonical_unit(Variable v) noexcept {
    return v == Variable::SeaSurfaceTemperature ? Unit::Celsius : Unit::Meters;
}

bool resolution_allowed(Variable v, Resolution r) noexcept {
    switch (v) {
        case Variable::WaterLevel: return r == Resolution::SixMinute || r == Resolution::Hourly;
        case Variable::MonthlyMeanSeaLevel: return r == Resolution::Monthly;
        case Variable::CoraZeta: return r == Resolution::Hourly;
        case Variable::SeaSurfaceTemperature: return r == Resolution::Daily;
    }
    return false;
}

namespace {

void require(bool cond, std::string_view field, std::string message) {
    if (!cond) throw Error(ErrorCode::InvalidValue, std::move(message), {{"field", std::string(field)}});
}

bool latitude_ok(double lat) { return std::isfinite(lat) && lat >= -90.0 && lat <= 90.0; }
bool longitude_ok(double lon) { return std::isfinite(lon) && lon >= -180.0 && lon <= 180.0; }

}  // namespace

void Station::validate(bool tide_station) const {
    require(!id.empty(), "id", "station id must be non-empty");
    require(latitude_ok(lat), "lat", fmt::format("station {} latitude {} out of range", id, lat));
    require(longitude_ok(lon), "lon", fmt::format("station {} longitude {} out of range", id, lon));
    require(!tide_station || !supported_datums.empty(), "supported_datums",
            fmt::format("tide station {} lists no datums", id));
}

bool Station::supports_datum(std::string_view datum) const {
    return std::find(supported_datums.begin(), supported_datums.end(), datum) != supported_datums.end();
}

void BBox::validate() const {
    require(latitude_ok(lat_min) && latitude_ok(lat_max), "lat", "bbox latitude out of range");
    require(longitude_ok(lon_min) && longitude_ok(lon_max), "lon", "bbox longitude out of range");
    require(lat_min < lat_max, "lat_min", "bbox requires lat_min < lat_max");
    require(lon_min < lon_max, "lon_min", "bbox requires lon_min < lon_max");
}

std::string describe(const SpatialSelector& sel) {
    struct Visitor {
        std::string operator()(const StationRef& s) const { return "station " + s.id; }
        std::string operator()(const GeoPoint& p) const { return fmt::format("point ({:.4f}, {:.4f})", p.lat, p.lon); }
        std::string operator()(const BBox& b) const {
            return fmt::format("bbox lat {:.2f}..{:.2f}, lon {:.2f}..{:.2f}", b.lat_min, b.lat_max, b.lon_min,
                               b.lon_max);
        }
        std::string operator()(const NamedRegion& r) const { return "region " + r.key; }
    };
    return std::visit(Visitor{}, sel);
}

Series::Series(Variable variable, Unit unit, std::optional<std::string> datum, std::vector<Timestamp> timestamps,
               std::vector<double> values, std::vector<std::uint8_t> valid)
    : variable_(variable),
      unit_(unit),
      datum_(std::move(datum)),
      timestamps_(std::move(timestamps)),
      values_(std::move(values)),
      valid_(std::move(valid)) {
    require(timestamps_.size() == values_.size() && values_.size() == valid_.size(), "values",
            "series timestamps, values and mask must have equal length");
    require(convertible(unit_, canonical_unit(variable_)), "unit",
            fmt::format("unit {} is not compatible with {}", unit_code(unit_), to_string(variable_)));
    for (std::size_t i = 1; i < timestamps_.size(); ++i)
        require(timestamps_[i - 1] < timestamps_[i], "timestamps",
                "series timestamps must be strictly ascending (at " + format_iso(timestamps_[i]) + ")");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (valid_[i] && !std::isfinite(values_[i])) valid_[i] = 0;
        if (!valid_[i]) values_[i] = std::nan("");
        valid_[i] = valid_[i] ? 1 : 0;
    }
}

std::size_t Series::valid_count() const noexcept {
    return static_cast<std::size_t>(std::count(valid_.begin(), valid_.end(), std::uint8_t{1}));
}

bool Series::operator==(const Series& other) const {
    if (variable_ != other.variable_ || unit_ != other.unit_ || datum_ != other.datum_ ||
        timestamps_ != other.timestamps_ || valid_ != other.valid_)
        return false;
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (valid_[i] && values_[i] != other.values_[i]) return false;
    return true;
}

GridSlice::GridSlice(Variable variable, Unit unit, Timestamp timestamp, std::vector<double> lats,
                     std::vector<double> lons, std::vector<double> values, std::vector<std::uint8_t> valid)
    : variable_(variable),
      unit_(unit),
      timestamp_(timestamp),
      lats_(std::move(lats)),
      lons_(std::move(lons)),
      values_(std::move(values)),
      valid_(std::move(valid)) {
    require(values_.size() == lats_.size() * lons_.size(), "values", "grid values must be |lats| x |lons|");
    require(valid_.size() == values_.size(), "valid", "grid mask must match value count");
    require(convertible(unit_, canonical_unit(variable_)), "unit", "grid unit incompatible with variable");
    for (std::size_t i = 1; i < lats_.size(); ++i)
        require(lats_[i - 1] < lats_[i], "lats", "grid latitudes must be strictly ascending");
    for (std::size_t i = 1; i < lons_.size(); ++i)
        require(lons_[i - 1] < lons_[i], "lons", "grid longitudes must be strictly ascending");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (valid_[i] && !std::isfinite(values_[i])) valid_[i] = 0;
        if (!valid_[i]) values_[i] = std::nan("");
        valid_[i] = valid_[i] ? 1 : 0;
    }
}

std::size_t GridSlice::valid_count() const noexcept {
    return static_cast<std::size_t>(std::count(valid_.begin(), valid_.end(), std::uint8_t{1}));
}

bool GridSlice::operator==(const GridSlice& other) const {
    if (variable_ != other.variable_ || unit_ != other.unit_ || timestamp_ != other.timestamp_ ||
        lats_ != other.lats_ || lons_ != other.lons_ || valid_ != other.valid_)
        return false;
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (valid_[i] && values_[i] != other.values_[i]) return false;
    return true;
}

}  // namespace oceanqa
