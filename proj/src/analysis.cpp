// SPDX-License-Identifier: Apache-2.0
#include "oceanqa/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "oceanqa/error.hpp"

namespace oceanqa {

void CompensatedSum::add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
        compensation_ += (sum_ - t) + x;
    else
        compensation_ += (x - t) + sum_;
    sum_ = t;
}

SummaryStats summary_stats(const Series& s) {
    SummaryStats out;
    CompensatedSum sum;
    bool first = true;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!s.valid(i)) continue;
        const double v = s.values()[i];
        const Timestamp t = s.timestamps()[i];
        if (first || v < out.min) {
            out.min = v;
            out.argmin_time = t;
        }
        if (first || v > out.max) {
            out.max = v;
            out.argmax_time = t;
        }
        first = false;
        sum.add(v);
        ++out.count;
    }
    if (out.count == 0) throw Error(ErrorCode::EmptySeries, "series has no non-missing values");

    const double n = static_cast<double>(out.count);
    out.mean = std::clamp(sum.value() / n, out.min, out.max);
    CompensatedSum sq;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!s.valid(i)) continue;
        const double d = s.values()[i] - out.mean;
        sq.add(d * d);
    }
    out.std = std::sqrt(std::max(0.0, sq.value() / n));
    return out;
}

TrendResult linear_trend(std::span<const TimedValue> points) {
    if (points.size() < 2)
        throw Error(ErrorCode::InsufficientData,
                    fmt::format("trend needs at least 2 points, got {}", points.size()), {{"n", points.size()}});
    const Timestamp t0 = points.front().time;
    std::vector<double> xs;
    xs.reserve(points.size());
    for (const auto& p : points) xs.push_back(std::chrono::duration<double>(p.time - t0).count() / kSecondsPerYear);

    const double n = static_cast<double>(points.size());
    CompensatedSum sx, sy;
    for (std::size_t i = 0; i < points.size(); ++i) {
        sx.add(xs[i]);
        sy.add(points[i].value);
    }
    const double xm = sx.value() / n;
    const double ym = sy.value() / n;
    CompensatedSum sxx, sxy, syy;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double dx = xs[i] - xm;
        const double dy = points[i].value - ym;
        sxx.add(dx * dx);
        sxy.add(dx * dy);
        syy.add(dy * dy);
    }
    if (sxx.value() <= 0.0)
        throw Error(ErrorCode::DegenerateTime, "all trend timestamps are identical");

    TrendResult r;
    r.n = points.size();
    r.slope_per_year = sxy.value() / sxx.value();
    r.intercept = ym - r.slope_per_year * xm;
    if (syy.value() <= 0.0) {
        r.slope_per_year = 0.0;
        r.intercept = ym;
        r.r_squared = 0.0;
        return r;
    }
    CompensatedSum ss_res;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double e = points[i].value - (r.intercept + r.slope_per_year * xs[i]);
        ss_res.add(e * e);
    }
    r.r_squared = std::clamp(1.0 - ss_res.value() / syy.value(), 0.0, 1.0);
    return r;
}

TrendResult linear_trend(const Series& s) {
    std::vector<TimedValue> pts;
    pts.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s.valid(i)) pts.push_back({s.timestamps()[i], s.values()[i]});
    return linear_trend(pts);
}

int calendar_key(Timestamp t, CalendarUnit unit) {
    const auto c = to_civil(t);
    if (unit == CalendarUnit::Month) return static_cast<int>(c.month);
    const auto days = std::chrono::floor<std::chrono::days>(t);
    const std::chrono::sys_days jan1{std::chrono::year{c.year} / 1 / 1};
    return static_cast<int>((days - jan1).count()) + 1;
}

std::string calendar_label(int key, CalendarUnit unit) {
    static constexpr const char* kMonths[] = {"January", "February", "March",     "April",   "May",      "June",
                                              "July",    "August",   "September", "October", "November", "December"};
    if (unit == CalendarUnit::Month && key >= 1 && key <= 12) return kMonths[key - 1];
    return fmt::format("day-of-year {}", key);
}

Baseline baseline_of(const Series& s, CalendarUnit unit) {
    if (s.valid_count() == 0) throw Error(ErrorCode::EmptySeries, "cannot build a baseline from an empty series");
    Baseline b;
    b.calendar = unit;
    b.unit = s.unit();
    b.datum = s.datum();
    std::map<int, CompensatedSum> sums;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!s.valid(i)) continue;
        const int key = calendar_key(s.timestamps()[i], unit);
        sums[key].add(s.values()[i]);
        ++b.climatology[key].count;
    }
    for (auto& [key, entry] : b.climatology) entry.mean = sums[key].value() / static_cast<double>(entry.count);
    b.reference_span = {s.timestamps().front(), s.timestamps().back(),
                        unit == CalendarUnit::Month ? Resolution::Monthly : Resolution::Daily};
    return b;
}

Series anomaly(const Series& s, const Baseline& b) {
    if (s.unit() != b.unit)
        throw Error(ErrorCode::UnitMismatch,
                    fmt::format("series unit {} differs from baseline unit {}", unit_code(s.unit()), unit_code(b.unit)));
    if (s.datum() != b.datum)
        throw Error(ErrorCode::UnitMismatch, fmt::format("series datum {} differs from baseline datum {}",
                                                         s.datum().value_or("none"), b.datum.value_or("none")));
    std::vector<double> values(s.values().begin(), s.values().end());
    std::vector<std::uint8_t> valid(s.valid_mask().begin(), s.valid_mask().end());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!valid[i]) continue;
        const int key = calendar_key(s.timestamps()[i], b.calendar);
        auto it = b.climatology.find(key);
        if (it == b.climatology.end() || it->second.count == 0)
            throw Error(ErrorCode::MissingBaselineEntry, "baseline has no entry for " + calendar_label(key, b.calendar),
                        {{"calendar_unit", calendar_label(key, b.calendar)}});
        values[i] -= it->second.mean;
    }
    return Series(s.variable(), s.unit(), s.datum(), std::vector<Timestamp>(s.timestamps().begin(), s.timestamps().end()),
                  std::move(values), std::move(valid));
}

ThresholdResult threshold_mask(const GridSlice& g, double threshold) {
    ThresholdResult r;
    r.exceeds.assign(g.cell_count(), 0);
    for (std::size_t i = 0; i < g.cell_count(); ++i) {
        if (!g.valid_mask()[i]) continue;
        ++r.unmasked_count;
        if (g.values()[i] >= threshold) {
            r.exceeds[i] = 1;
            ++r.exceed_count;
        }
    }
    if (r.unmasked_count == 0) throw Error(ErrorCode::FullyMasked, "grid has no unmasked cells");
    r.fraction = static_cast<double>(r.exceed_count) / static_cast<double>(r.unmasked_count);
    return r;
}

GridStats grid_stats(const GridSlice& g) {
    GridStats out;
    CompensatedSum sum;
    bool first = true;
    for (std::size_t row = 0; row < g.rows(); ++row) {
        for (std::size_t col = 0; col < g.cols(); ++col) {
            if (!g.valid(row, col)) {
                ++out.masked_count;
                continue;
            }
            const double v = g.value(row, col);
            if (first || v < out.min) {
                out.min = v;
                out.argmin = {g.lats()[row], g.lons()[col]};
            }
            if (first || v > out.max) {
                out.max = v;
                out.argmax = {g.lats()[row], g.lons()[col]};
            }
            first = false;
            sum.add(v);
            ++out.count;
        }
    }
    if (out.count == 0) throw Error(ErrorCode::FullyMasked, "grid has no unmasked cells");
    const double n = static_cast<double>(out.count);
    out.mean = std::clamp(sum.value() / n, out.min, out.max);
    CompensatedSum sq;
    for (std::size_t i = 0; i < g.cell_count(); ++i) {
        if (!g.valid_mask()[i]) continue;
        const double d = g.values()[i] - out.mean;
        sq.add(d * d);
    }
    out.std = std::sqrt(std::max(0.0, sq.value() / n));
    return out;
}

double haversine_km(GeoPoint a, GeoPoint b, double radius_km) {
    constexpr double kDeg = std::numbers::pi / 180.0;
    const double dlat = (b.lat - a.lat) * kDeg;
    const double dlon = (b.lon - a.lon) * kDeg;
    const double s1 = std::sin(dlat / 2.0);
    const double s2 = std::sin(dlon / 2.0);
    const double h = s1 * s1 + std::cos(a.lat * kDeg) * std::cos(b.lat * kDeg) * s2 * s2;
    const double hc = std::clamp(h, 0.0, 1.0);
    return 2.0 * radius_km * std::atan2(std::sqrt(hc), std::sqrt(1.0 - hc));
}

NearestNode nearest_node(GeoPoint p, std::span<const Node> nodes, double radius_km) {
    std::optional<NearestNode> best;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!nodes[i].valid) continue;
        const double d = haversine_km(p, {nodes[i].lat, nodes[i].lon}, radius_km);
        if (!best || d < best->distance_km) best = NearestNode{i, d};
    }
    if (!best) throw Error(ErrorCode::NoValidNode, "no valid node among candidates", {{"candidates", nodes.size()}});
    return *best;
}

}  // namespace oceanqa
