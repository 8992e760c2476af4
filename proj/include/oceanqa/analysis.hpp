// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oceanqa/types.hpp"

namespace oceanqa {

inline constexpr double kEarthRadiusKm = 6371.0;

/// Neumaier-compensated running sum; order of add() calls fixes the result.
class CompensatedSum {
public:
    void add(double x) noexcept;
    double value() const noexcept { return sum_ + compensation_; }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

/// Min/max/mean/population std over non-missing values. argmin/argmax are the
/// earliest timestamps attaining the extremes. Throws EmptySeries.
SummaryStats summary_stats(const Series& s);

struct TimedValue {
    Timestamp time{};
    double value = 0.0;
};

struct TrendResult {
    double slope_per_year = 0.0;
    double intercept = 0.0;  // fitted value at the first point's time
    double r_squared = 0.0;
    std::size_t n = 0;
    bool operator==(const TrendResult&) const = default;
};

// Ordinary least squares of value against years elapsed since the first
// point. A constant response yields slope 0 and r^2 = 0.
TrendResult linear_trend(std::span<const TimedValue> points);
TrendResult linear_trend(const Series& s);

enum class CalendarUnit { Month, DayOfYear };

struct ClimatologyEntry {
    double mean = 0.0;
    std::size_t count = 0;
};

struct Baseline {
    CalendarUnit calendar = CalendarUnit::Month;
    Unit unit = Unit::Meters;
    std::optional<std::string> datum;
    std::map<int, ClimatologyEntry> climatology;
    TimeRange reference_span;
};

int calendar_key(Timestamp t, CalendarUnit unit);
std::string calendar_label(int key, CalendarUnit unit);

/// Per-calendar-unit means of the non-missing values of s.
Baseline baseline_of(const Series& s, CalendarUnit unit = CalendarUnit::Month);

/// Pointwise departure from the baseline climatology. Masked points stay
/// masked. Throws MissingBaselineEntry or UnitMismatch.
Series anomaly(const Series& s, const Baseline& b);

struct ThresholdResult {
    std::vector<std::uint8_t> exceeds;  // same layout as the grid
    std::size_t exceed_count = 0;
    std::size_t unmasked_count = 0;
    double fraction = 0.0;
};

/// Cells at or above threshold among unmasked cells. Throws FullyMasked.
ThresholdResult threshold_mask(const GridSlice& g, double threshold);

struct GridStats {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double std = 0.0;
    std::size_t count = 0;
    std::size_t masked_count = 0;
    GeoPoint argmin;
    GeoPoint argmax;
};

GridStats grid_stats(const GridSlice& g);

struct Node {
    double lat = 0.0;
    double lon = 0.0;
    bool valid = true;
};

struct NearestNode {
    std::size_t index = 0;
    double distance_km = 0.0;
};

double haversine_km(GeoPoint a, GeoPoint b, double radius_km = kEarthRadiusKm);

/// Valid node minimizing great-circle distance; ties go to the lowest index.
/// Throws NoValidNode.
NearestNode nearest_node(GeoPoint p, std::span<const Node> nodes, double radius_km = kEarthRadiusKm);

}  // namespace oceanqa
