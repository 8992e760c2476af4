// SPDX-License-Identifier: Apache-2.0
#include "oceanqa/dispatcher.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <future>
#include <set>

#include <fmt/format.h>

#include "oceanqa/analysis.hpp"
#include "oceanqa/error.hpp"
#include "oceanqa/noaa.hpp"
#include "oceanqa/rendering.hpp"
#include "oceanqa/retrieval.hpp"
#include "oceanqa/serialization.hpp"
#include "oceanqa/text_util.hpp"

namespace oceanqa {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxTextLength = 2000;
constexpr double kMaxBoxArea = 2500.0;  // square degrees
constexpr int kMaxSixMinuteDays = 366;
constexpr int kMaxHourlyDays = 3660;
constexpr int kMaxCoraDays = 366;

const std::vector<std::string> kSeriesStats = {"full_series", "max", "min", "mean", "std", "trend"};
const std::vector<std::string> kGridStats = {"full_series", "max", "min", "mean", "std"};
const std::vector<std::string> kDatums = {"MSL", "MHHW", "MHW", "MTL", "MLW", "MLLW", "NAVD", "STND"};

struct Violation {
    std::string param;
    std::string problem;
};

std::optional<double> parse_double(std::string_view s) {
    auto t = trim(s);
    if (t.empty()) return std::nullopt;
    double v = 0.0;
    const char* first = t.data();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::optional<double> as_number(const json& v) {
    if (v.is_number()) {
        double d = v.get<double>();
        return std::isfinite(d) ? std::optional<double>(d) : std::nullopt;
    }
    if (v.is_string()) return parse_double(v.get<std::string>());
    return std::nullopt;
}

std::string show(const json& v) {
    auto s = v.dump();
    return s.size() > 60 ? s.substr(0, 57) + "..." : s;
}

std::optional<std::vector<double>> number_list(const std::string& s, std::size_t n) {
    auto parts = split(s, ',');
    if (parts.size() != n) return std::nullopt;
    std::vector<double> out;
    for (const auto& p : parts) {
        auto d = parse_double(p);
        if (!d) return std::nullopt;
        out.push_back(*d);
    }
    return out;
}

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

json point_json(GeoPoint p, const std::string& name) { return {{"lat", p.lat}, {"lon", p.lon}, {"name", name}}; }

json bbox_json(const BBox& b, const std::string& key, const std::string& name) {
    return {{"lat_min", b.lat_min}, {"lat_max", b.lat_max}, {"lon_min", b.lon_min}, {"lon_max", b.lon_max},
            {"key", key.empty() ? json(nullptr) : json(key)}, {"name", name}};
}

std::optional<std::string> check_point(double lat, double lon) {
    if (lat < -90.0 || lat > 90.0) return fmt::format("latitude {} outside [-90, 90]", lat);
    if (lon < -180.0 || lon > 180.0) return fmt::format("longitude {} outside [-180, 180]", lon);
    return std::nullopt;
}

std::optional<std::string> check_box(const BBox& b) {
    try {
        b.validate();
    } catch (const Error& e) {
        return std::string(e.what());
    }
    const double area = (b.lat_max - b.lat_min) * (b.lon_max - b.lon_min);
    if (area > kMaxBoxArea) return fmt::format("bounding box spans {:.0f} square degrees, limit {:.0f}", area, kMaxBoxArea);
    return std::nullopt;
}

BBox around(GeoPoint c) { return {c.lat - 0.5, c.lat + 0.5, c.lon - 0.5, c.lon + 0.5}; }

// Each normalizer returns the normalized value or a problem description.
using Normalized = std::variant<json, std::string>;

Normalized normalize(const ParamSpec& p, const json& v, const Gazetteer& gz) {
    switch (p.type) {
        case ParamType::Text: {
            if (!v.is_string()) return std::string("expected a string");
            auto s = trim(v.get<std::string>());
            if (s.empty()) return std::string("must not be blank");
            if (s.size() > kMaxTextLength) return fmt::format("longer than {} bytes", kMaxTextLength);
            return json(s);
        }
        case ParamType::Integer: {
            auto d = as_number(v);
            if (!d || std::floor(*d) != *d) return "expected an integer, got " + show(v);
            if (p.min && *d < *p.min) return fmt::format("must be >= {}", *p.min);
            if (p.max && *d > *p.max) return fmt::format("must be <= {}", *p.max);
            return json(static_cast<long long>(*d));
        }
        case ParamType::Number: {
            auto d = as_number(v);
            if (!d) return "expected a finite number, got " + show(v);
            if (p.min && *d < *p.min) return fmt::format("must be >= {}", *p.min);
            if (p.max && *d > *p.max) return fmt::format("must be <= {}", *p.max);
            return json(*d);
        }
        case ParamType::Date: {
            if (!v.is_string()) return "expected a date string YYYY-MM-DD, got " + show(v);
            auto ts = parse_timestamp(trim(v.get<std::string>()));
            if (!ts) return "not a date: " + show(v);
            const int year = to_civil(*ts).year;
            if (year < 1800 || year > 2200) return fmt::format("year {} outside 1800..2200", year);
            return json(format_date(*ts));
        }
        case ParamType::Enum: {
            if (!v.is_string()) return "expected one of the enum values, got " + show(v);
            auto s = to_lower(trim(v.get<std::string>()));
            for (const auto& e : p.enum_domain)
                if (to_lower(e) == s) return json(e);
            return fmt::format("'{}' not in {{{}}}", trim(v.get<std::string>()).substr(0, 40), fmt::join(p.enum_domain, ", "));
        }
        case ParamType::Station: {
            std::string s;
            if (v.is_number_integer() && v.get<long long>() > 0)
                s = std::to_string(v.get<long long>());
            else if (v.is_string())
                s = trim(v.get<std::string>());
            else
                return "expected a station id or name, got " + show(v);
            if (s.empty()) return std::string("must not be blank");
            if (all_digits(s)) {
                if (s.size() != 7) return "station ids have 7 digits, got '" + s.substr(0, 20) + "'";
                return json(s);
            }
            const auto* e = gz.lookup(s);
            if (!e) return "unknown station '" + s.substr(0, 60) + "'";
            if (e->kind != GazetteerEntry::Kind::Station) return "'" + e->label + "' is a region, not a tide station";
            return json(e->station.id);
        }
        case ParamType::Location: {
            if (v.is_object()) {
                if (!v.contains("lat") || !v.contains("lon")) return std::string("expected {lat, lon} numbers");
                auto lat = as_number(v["lat"]);
                auto lon = as_number(v["lon"]);
                if (!lat || !lon) return std::string("expected {lat, lon} numbers");
                if (auto bad = check_point(*lat, *lon)) return *bad;
                std::string name = v.contains("name") && v["name"].is_string() ? v["name"].get<std::string>()
                                                                                 : fmt::format("{:.4f}, {:.4f}", *lat, *lon);
                return point_json({*lat, *lon}, name);
            }
            if (!v.is_string()) return "expected a place name or 'lat,lon', got " + show(v);
            auto s = trim(v.get<std::string>());
            if (auto ll = number_list(s, 2)) {
                if (auto bad = check_point((*ll)[0], (*ll)[1])) return *bad;
                return point_json({(*ll)[0], (*ll)[1]}, fmt::format("{:.4f}, {:.4f}", (*ll)[0], (*ll)[1]));
            }
            const auto* e = gz.lookup(s);
            if (!e) e = gz.station_by_id(s);
            if (!e) return "unknown location '" + s.substr(0, 60) + "'";
            return point_json(e->center, e->label);
        }
        case ParamType::Region: {
            if (v.is_object()) {
                std::optional<double> f[4];
                const char* keys[4] = {"lat_min", "lat_max", "lon_min", "lon_max"};
                for (int i = 0; i < 4; ++i)
                    if (v.contains(keys[i])) f[i] = as_number(v[keys[i]]);
                if (!f[0] || !f[1] || !f[2] || !f[3]) return std::string("expected {lat_min, lat_max, lon_min, lon_max} numbers");
                BBox b{*f[0], *f[1], *f[2], *f[3]};
                if (auto bad = check_box(b)) return *bad;
                std::string name = v.contains("name") && v["name"].is_string() ? v["name"].get<std::string>() : describe(b);
                return bbox_json(b, "", name);
            }
            if (!v.is_string()) return "expected a region name, key or 'lat_min,lat_max,lon_min,lon_max', got " + show(v);
            auto s = trim(v.get<std::string>());
            if (auto n = number_list(s, 4)) {
                BBox b{(*n)[0], (*n)[1], (*n)[2], (*n)[3]};
                if (auto bad = check_box(b)) return *bad;
                return bbox_json(b, "", describe(b));
            }
            const auto* e = gz.region(to_lower(s));
            if (!e) e = gz.lookup(s);
            if (!e) return "unknown region '" + s.substr(0, 60) + "'";
            if (e->kind == GazetteerEntry::Kind::Region) return bbox_json(e->bbox, e->region_key, e->label);
            return bbox_json(around(e->center), "", e->label);
        }
    }
    return std::string("unsupported parameter type");
}

[[noreturn]] void upstream(const std::string& function, const Error& e) {
    bool retryable = e.code() == ErrorCode::ProviderUnavailable;
    if (e.details().is_object() && e.details().contains("retryable") && e.details()["retryable"].is_boolean())
        retryable = e.details()["retryable"].get<bool>();
    throw Error(ErrorCode::UpstreamFailure, e.what(),
                {{"function", function},
                 {"cause", std::string(to_string(e.code()))},
                 {"message", e.what()},
                 {"retryable", retryable},
                 {"details", e.details()}});
}

std::string default_param(ErrorCode c) {
    switch (c) {
        case ErrorCode::EmptyRange: return "end";
        case ErrorCode::OutOfCoverage: return "begin";
        case ErrorCode::ResolutionMismatch: return "interval";
        default: return "arguments";
    }
}

// ---- handler helpers -----------------------------------------------------

Stat stat_of(const std::string& s) {
    if (s == "max") return Stat::Max;
    if (s == "min") return Stat::Min;
    if (s == "mean") return Stat::Mean;
    if (s == "std") return Stat::Std;
    if (s == "trend") return Stat::Trend;
    return Stat::FullSeries;
}

std::string stat_name(Stat s) {
    switch (s) {
        case Stat::Max: return "max";
        case Stat::Min: return "min";
        case Stat::Mean: return "mean";
        case Stat::Std: return "std";
        case Stat::Trend: return "trend";
        default: return "full_series";
    }
}

TimeRange window(const json& args, Resolution r, int max_days) {
    auto b = *parse_timestamp(args["begin"].get<std::string>());
    auto e = *parse_timestamp(args["end"].get<std::string>());
    if (e < b) reject_arg("end", fmt::format("end {} precedes begin {}", format_date(e), format_date(b)));
    const auto days = (e - b) / std::chrono::days(1) + 1;
    if (max_days > 0 && days > max_days)
        reject_arg("end", fmt::format("window of {} days exceeds the {}-day limit for this request", days, max_days));
    return {start_of_day(b), end_of_day(e), r};
}

std::string str_or(const json& args, const char* key, std::string fallback) {
    return args.contains(key) && args[key].is_string() ? args[key].get<std::string>() : fallback;
}

json encode_trend(const TrendResult& t) {
    return {{"slope_per_year", t.slope_per_year},
            {"slope_mm_per_year", t.slope_per_year * 1000.0},
            {"intercept", t.intercept},
            {"r_squared", t.r_squared},
            {"n", t.n}};
}

struct SeriesOutcome {
    std::string label;        // display name
    std::string where;        // "Boston (station 8443970)"
    std::string what;         // "hourly water level"
    Series series;
    Provenance provenance;
    json extra = json::object();
};

std::string datum_phrase(const Series& s) { return s.datum() ? " relative to " + *s.datum() : ""; }

ToolResponse series_response(const CallContext& ctx, SeriesOutcome o, FigureStore* figures, bool always_trend) {
    const Stat stat = stat_of(str_or(ctx.args, "stat", "full_series"));
    const auto stats = summary_stats(o.series);
    std::optional<TrendResult> trend;
    if (stat == Stat::Trend) {
        trend = linear_trend(o.series);
    } else if (always_trend) {
        try {
            trend = linear_trend(o.series);
        } catch (const Error&) {
        }
    }

    const std::string u = std::string(unit_symbol(o.series.unit()));
    const std::string dp = datum_phrase(o.series);
    const std::string span = fmt::format("{} to {}", format_date(o.provenance.time_span.start), format_date(o.provenance.time_span.end));
    const std::string src = fmt::format("{}, {}", o.provenance.source_name, o.provenance.dataset_id);

    json data = encode(stats);
    data["label"] = o.label;
    data["variable"] = std::string(to_string(o.series.variable()));
    data["unit"] = std::string(unit_code(o.series.unit()));
    data["datum"] = o.series.datum() ? json(*o.series.datum()) : json(nullptr);
    data["stat"] = stat_name(stat);
    data["valid_count"] = o.series.valid_count();
    data["point_count"] = o.series.size();
    for (auto& [k, v] : o.extra.items()) data[k] = v;
    if (trend) data["trend"] = encode_trend(*trend);

    std::string text;
    switch (stat) {
        case Stat::Max:
        case Stat::Min: {
            const bool mx = stat == Stat::Max;
            const double v = mx ? stats.max : stats.min;
            const auto at = mx ? stats.argmax_time : stats.argmin_time;
            data["value"] = v;
            data["at"] = format_iso(at);
            text = fmt::format("The {} {} at {} from {} was {} {}{}, at {} UTC ({}).", mx ? "maximum" : "minimum", o.what, o.where,
                               span, format_fixed(v), u, dp, format_minute(at), src);
            break;
        }
        case Stat::Mean:
            data["value"] = stats.mean;
            text = fmt::format("The mean {} at {} from {} was {} {}{} over {} values ({}).", o.what, o.where, span,
                               format_fixed(stats.mean), u, dp, stats.count, src);
            break;
        case Stat::Std:
            data["value"] = stats.std;
            text = fmt::format("The standard deviation of {} at {} from {} was {} {} over {} values ({}).", o.what, o.where, span,
                               format_fixed(stats.std), u, stats.count, src);
            break;
        case Stat::Trend:
            data["value"] = trend->slope_per_year;
            text = fmt::format("The linear trend in {} at {} from {} was {} mm/yr (r^2 {}, {} values) ({}).", o.what, o.where, span,
                               format_fixed(trend->slope_per_year * 1000.0), format_fixed(trend->r_squared), trend->n, src);
            break;
        default:
            text = fmt::format("{} at {} from {}: minimum {} {} at {} UTC, maximum {} {} at {} UTC, mean {} {}{}, from {} of {} values ({}).",
                               o.what, o.where, span, format_fixed(stats.min), u, format_minute(stats.argmin_time),
                               format_fixed(stats.max), u, format_minute(stats.argmax_time), format_fixed(stats.mean), u, dp,
                               stats.count, o.series.size(), src);
            if (!text.empty()) text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
            if (trend)
                text += fmt::format(" Linear trend {} mm/yr.", format_fixed(trend->slope_per_year * 1000.0));
            break;
    }
    data["series"] = encode(o.series);

    o.provenance.processing_steps.push_back(fmt::format("summary statistics over {} valid values (population std)", stats.count));
    if (trend) o.provenance.processing_steps.push_back(fmt::format("ordinary least squares trend over {} values", trend->n));

    ToolResponse r;
    if (figures && ctx.render) {
        r.images.push_back(render_timeseries(*figures, {Trace{&o.series, stats, o.label}},
                                             fmt::format("{} at {}, {}", o.what, o.label, span)));
        o.provenance.processing_steps.push_back("rendered time-series figure " + r.images.back().hash.substr(0, 12));
    }
    r.text = std::move(text);
    r.json_data = std::move(data);
    r.others = {{"unit", std::string(unit_code(o.series.unit()))},
                {"time_span", encode(o.provenance.time_span)},
                {"provenance", json::array({encode(o.provenance)})}};
    return r;
}

std::string station_label(const Gazetteer& gz, const json& args, const std::string& id) {
    if (args.contains("label")) return args["label"].get<std::string>();
    if (const auto* e = gz.station_by_id(id)) return e->label;
    return "station " + id;
}

ParamSpec param(std::string name, ParamType t, bool required, std::string description) {
    ParamSpec p;
    p.name = std::move(name);
    p.type = t;
    p.required = required;
    p.description = std::move(description);
    return p;
}

ParamSpec enum_param(std::string name, std::vector<std::string> domain, std::string dflt, std::string description) {
    ParamSpec p = param(std::move(name), ParamType::Enum, false, std::move(description));
    p.enum_domain = std::move(domain);
    p.default_value = json(std::move(dflt));
    return p;
}

ParamSpec label_param() { return param("label", ParamType::Text, false, "Display name for the location"); }

}  // namespace

std::string_view to_string(ParamType t) noexcept {
    switch (t) {
        case ParamType::Text: return "text";
        case ParamType::Integer: return "integer";
        case ParamType::Number: return "number";
        case ParamType::Date: return "date";
        case ParamType::Enum: return "enum";
        case ParamType::Station: return "station";
        case ParamType::Location: return "location";
        case ParamType::Region: return "region";
    }
    return "text";
}

void reject_arg(const std::string& param, const std::string& problem) {
    throw Error(ErrorCode::ArgValidation, param + ": " + problem,
                {{"violations", json::array({{{"param", param}, {"problem", problem}}})}});
}

FunctionCall FunctionCall::from_json(const json& j) {
    if (!j.is_object()) throw Error(ErrorCode::MalformedRequest, "function call must be an object", {{"field", "call"}});
    const json& f = j.contains("function") && j["function"].is_object() ? j["function"] : j;
    if (!f.contains("name") || !f["name"].is_string())
        throw Error(ErrorCode::MalformedRequest, "function call needs a string name", {{"field", "name"}});
    FunctionCall c;
    c.name = f["name"].get<std::string>();
    if (!f.contains("arguments") || f["arguments"].is_null()) return c;
    const auto& a = f["arguments"];
    if (a.is_string()) {
        auto s = a.get<std::string>();
        if (trim(s).empty()) return c;
        try {
            c.args = json::parse(s);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::MalformedRequest, std::string("arguments is not valid JSON: ") + e.what(),
                        {{"field", "arguments"}});
        }
    } else {
        c.args = a;
    }
    return c;
}

json FunctionCall::to_json() const { return {{"name", name}, {"arguments", args}}; }

Registry::Registry(std::shared_ptr<const Gazetteer> gazetteer) : gazetteer_(std::move(gazetteer)) {
    if (!gazetteer_) throw Error(ErrorCode::ConfigError, "registry needs a gazetteer", {{"field", "gazetteer"}});
}

void Registry::add(FunctionDescriptor fd) {
    if (fd.name.empty()) throw Error(ErrorCode::InvalidValue, "function name must not be empty", {{"field", "name"}});
    if (find(fd.name)) throw Error(ErrorCode::DuplicateName, "function '" + fd.name + "' already registered", {{"name", fd.name}});
    if (!fd.handler) throw Error(ErrorCode::InvalidValue, "function '" + fd.name + "' has no handler", {{"field", "handler"}});
    std::set<std::string> seen;
    for (const auto& p : fd.params) {
        if (p.name.empty() || !seen.insert(p.name).second)
            throw Error(ErrorCode::InvalidValue, "duplicate or empty parameter name in " + fd.name, {{"field", "params"}});
        if (p.type == ParamType::Enum && p.enum_domain.empty())
            throw Error(ErrorCode::InvalidValue, "enum parameter " + p.name + " has an empty domain", {{"field", p.name}});
    }
    std::stable_partition(fd.params.begin(), fd.params.end(), [](const ParamSpec& p) { return p.required; });
    functions_.push_back(std::move(fd));
}

const FunctionDescriptor* Registry::find(std::string_view name) const {
    for (const auto& f : functions_)
        if (f.name == name) return &f;
    return nullptr;
}

json encode(const FunctionDescriptor& fd) {
    json props = json::object();
    json required = json::array();
    for (const auto& p : fd.params) {
        json s;
        switch (p.type) {
            case ParamType::Integer: s["type"] = "integer"; break;
            case ParamType::Number: s["type"] = "number"; break;
            case ParamType::Date:
                s["type"] = "string";
                s["format"] = "date";
                break;
            default: s["type"] = "string"; break;
        }
        if (p.type == ParamType::Enum) s["enum"] = p.enum_domain;
        if (p.min) s["minimum"] = *p.min;
        if (p.max) s["maximum"] = *p.max;
        if (p.default_value) s["default"] = *p.default_value;
        s["description"] = p.description;
        s["x-semantic-type"] = std::string(to_string(p.type));
        props[p.name] = std::move(s);
        if (p.required) required.push_back(p.name);
    }
    return {{"type", "function"},
            {"function",
             {{"name", fd.name},
              {"description", fd.summary},
              {"parameters", {{"type", "object"}, {"properties", props}, {"required", required}, {"additionalProperties", false}}}}}};
}

json Registry::emit_function_schemas() const {
    json out = json::array();
    for (const auto& f : functions_) out.push_back(encode(f));
    return out;
}

json Registry::validate(const FunctionCall& call) const {
    const auto* fd = find(call.name);
    if (!fd) {
        json names = json::array();
        for (const auto& f : functions_) names.push_back(f.name);
        throw Error(ErrorCode::UnknownFunction, "unknown function '" + call.name + "'", {{"function", call.name}, {"available", names}});
    }
    std::vector<Violation> violations;
    json out = json::object();
    if (!call.args.is_object()) {
        violations.push_back({"arguments", "must be a JSON object, got " + show(call.args)});
    } else {
        for (const auto& [k, v] : call.args.items()) {
            const bool known = std::any_of(fd->params.begin(), fd->params.end(), [&](const ParamSpec& p) { return p.name == k; });
            if (!known && k.empty()) violations.push_back({"arguments", "empty parameter name"});
            else if (!known) violations.push_back({k, "unknown parameter"});
        }
        for (const auto& p : fd->params) {
            if (!call.args.contains(p.name) || call.args[p.name].is_null()) {
                if (p.required)
                    violations.push_back({p.name, "required parameter missing"});
                else if (p.default_value)
                    out[p.name] = *p.default_value;
                continue;
            }
            auto n = normalize(p, call.args[p.name], *gazetteer_);
            if (auto* problem = std::get_if<std::string>(&n))
                violations.push_back({p.name, *problem});
            else
                out[p.name] = std::get<json>(n);
        }
    }
    if (!violations.empty()) {
        json list = json::array();
        std::string msg;
        for (const auto& v : violations) {
            list.push_back({{"param", v.param}, {"problem", v.problem}});
            msg += (msg.empty() ? "" : "; ") + v.param + ": " + v.problem;
        }
        throw Error(ErrorCode::ArgValidation, msg, {{"function", call.name}, {"violations", list}});
    }
    return out;
}

ToolResponse Registry::dispatch(const FunctionCall& call, DispatchOptions opts) const {
    json args = validate(call);
    const auto* fd = find(call.name);
    CallContext ctx{fd->name, args, opts.render};
    ToolResponse r;
    try {
        r = fd->handler(ctx);
    } catch (const Error& e) {
        switch (e.code()) {
            case ErrorCode::ArgValidation: {
                json d = e.details();
                if (!d.is_object()) d = json::object();
                d["function"] = fd->name;
                throw Error(ErrorCode::ArgValidation, e.what(), d);
            }
            case ErrorCode::UpstreamFailure:
            case ErrorCode::Internal: throw;
            case ErrorCode::EmptyRange:
            case ErrorCode::ResolutionMismatch:
            case ErrorCode::OutOfCoverage:
            case ErrorCode::InvalidValue:
            case ErrorCode::UnitMismatch: {
                std::string param = default_param(e.code());
                if (e.details().is_object() && e.details().contains("param") && e.details()["param"].is_string())
                    param = e.details()["param"].get<std::string>();
                throw Error(ErrorCode::ArgValidation, param + ": " + e.what(),
                            {{"function", fd->name},
                             {"violations", json::array({{{"param", param}, {"problem", e.what()}, {"cause", std::string(to_string(e.code()))}}})},
                             {"details", e.details()}});
            }
            default: upstream(fd->name, e);
        }
    } catch (const std::exception& e) {
        throw Error(ErrorCode::Internal, std::string("handler failed: ") + e.what(), {{"function", fd->name}});
    }
    json others = {{"function", fd->name}, {"arguments", args}};
    for (auto& [k, v] : r.others.items()) others[k] = v;
    r.others = std::move(others);
    auto problems = validate_tool_response(encode(r));
    if (!problems.empty())
        throw Error(ErrorCode::Internal, "handler produced an invalid response: " + problems.front(),
                    {{"function", fd->name}, {"problems", problems}});
    return r;
}

// ---- structured lowering -------------------------------------------------

std::vector<FunctionCall> lower(const StructuredQuery& q) {
    q.validate();
    const std::string stat = q.stat == Stat::Compare ? "full_series" : stat_name(q.stat);
    std::vector<FunctionCall> calls;
    for (std::size_t i = 0; i < q.selectors.size(); ++i) {
        const auto& sel = q.selectors[i];
        FunctionCall c;
        json& a = c.args;
        a["label"] = i < q.labels.size() ? q.labels[i] : describe(sel);
        auto need = [&](bool ok) {
            if (!ok)
                throw Error(ErrorCode::InvalidQuery,
                            fmt::format("selector {} does not fit {}", describe(sel), to_string(q.variable)),
                            {{"field", "selectors"}});
        };
        switch (q.variable) {
            case Variable::WaterLevel:
            case Variable::MonthlyMeanSeaLevel: {
                const auto* st = std::get_if<StationRef>(&sel);
                need(st != nullptr);
                const bool monthly = q.variable == Variable::MonthlyMeanSeaLevel;
                c.name = monthly ? "get_monthly_mean_sea_level" : "get_water_level";
                a["station"] = st->id;
                a["begin"] = format_date(q.time.start);
                a["end"] = format_date(q.time.end);
                a["datum"] = q.datum.value_or(std::string(kDefaultDatum));
                if (!monthly) a["interval"] = q.time.resolution == Resolution::SixMinute ? "six_minute" : "hourly";
                a["stat"] = stat;
                break;
            }
            case Variable::CoraZeta: {
                const auto* p = std::get_if<GeoPoint>(&sel);
                need(p != nullptr);
                c.name = "get_cora_series";
                a["location"] = {{"lat", p->lat}, {"lon", p->lon}, {"name", a["label"]}};
                a["begin"] = format_date(q.time.start);
                a["end"] = format_date(q.time.end);
                a["stat"] = stat;
                break;
            }
            case Variable::SeaSurfaceTemperature: {
                c.name = "get_sst";
                if (const auto* r = std::get_if<NamedRegion>(&sel)) {
                    a["region"] = r->key;
                } else if (const auto* b = std::get_if<BBox>(&sel)) {
                    a["region"] = {{"lat_min", b->lat_min}, {"lat_max", b->lat_max}, {"lon_min", b->lon_min},
                                   {"lon_max", b->lon_max}, {"name", a["label"]}};
                } else {
                    need(false);
                }
                a["date"] = format_date(q.time.end);
                a["stat"] = stat == "trend" ? "full_series" : stat;
                break;
            }
        }
        calls.push_back(std::move(c));
    }
    return calls;
}

namespace {

void add_notes(json& others, const std::vector<std::string>& notes) {
    if (notes.empty() || !others.contains("provenance")) return;
    for (auto& p : others["provenance"])
        for (const auto& n : notes) p["processing_steps"].push_back("query interpretation: " + n);
}

}  // namespace

ToolResponse dispatch_structured(const Registry& reg, const StructuredQuery& q, FigureStore* figures) {
    auto calls = lower(q);
    std::vector<std::string> notes = q.notes;
    if (q.variable == Variable::SeaSurfaceTemperature && q.stat == Stat::Trend)
        notes.emplace_back("trend is undefined for a single-day map; grid summary returned");

    if (q.stat != Stat::Compare) {
        auto r = reg.dispatch(calls.front());
        add_notes(r.others, notes);
        return r;
    }

    std::vector<std::future<ToolResponse>> futures;
    for (const auto& c : calls)
        futures.push_back(std::async(std::launch::async, [&reg, c] { return reg.dispatch(c, {.render = false}); }));

    ToolResponse out;
    json errors = json::array();
    json provenance = json::array();
    json call_list = json::array();
    std::vector<std::string> texts;
    std::vector<Series> series;
    std::vector<std::string> series_labels;
    std::optional<json> unit, span;
    std::set<std::string> datums;

    for (std::size_t i = 0; i < calls.size(); ++i) {
        std::string label = calls[i].args["label"].get<std::string>();
        if (out.json_data.contains(label)) label += fmt::format(" ({})", i + 1);
        try {
            auto r = futures[i].get();
            call_list.push_back({{"function", r.others["function"]}, {"arguments", r.others["arguments"]}});
            if (!unit) unit = r.others["unit"];
            if (!span) span = r.others["time_span"];
            for (const auto& p : r.others["provenance"]) provenance.push_back(p);
            if (r.json_data.contains("series")) {
                series.push_back(decode_series(r.json_data["series"]));
                series_labels.push_back(label);
                datums.insert(series.back().datum().value_or(""));
            }
            out.json_data[label] = std::move(r.json_data);
            texts.push_back(std::move(r.text));
        } catch (const Error& e) {
            call_list.push_back({{"function", calls[i].name}, {"arguments", calls[i].args}});
            errors.push_back({{"location", label}, {"code", std::string(to_string(e.code()))}, {"message", e.what()}, {"details", e.details()}});
            texts.push_back(fmt::format("No result for {}: {}.", label, e.what()));
        }
    }
    if (out.json_data.empty())
        throw Error(ErrorCode::UpstreamFailure, "every location in the comparison failed",
                    {{"function", "compare"}, {"cause", errors[0]["code"]}, {"message", errors[0]["message"]},
                     {"retryable", false}, {"errors", errors}});

    if (series.size() == 2) {
        if (series[0].unit() != series[1].unit() || datums.size() != 1)
            throw Error(ErrorCode::UnitMismatch, "compared series differ in unit or datum", {{"param", "datum"}});
        for (auto& p : provenance)
            p["processing_steps"].push_back(fmt::format("compared in {}{} without conversion", unit_code(series[0].unit()),
                                                        series[0].datum() ? " relative to " + *series[0].datum() : ""));
    }

    if (figures && !series.empty()) {
        std::vector<Trace> traces;
        for (std::size_t i = 0; i < series.size(); ++i) traces.push_back({&series[i], summary_stats(series[i]), series_labels[i]});
        const auto& tr = span ? decode_time_range(*span) : q.time;
        auto ref = render_timeseries(*figures, traces,
                                     fmt::format("{}: {}, {} to {}", to_string(q.variable), fmt::join(series_labels, " vs "),
                                                 format_date(tr.start), format_date(tr.end)));
        out.images.push_back(ref);
        for (auto& p : provenance) p["processing_steps"].push_back("rendered comparison figure " + ref.hash.substr(0, 12));
    }

    out.text = fmt::format("{}", fmt::join(texts, " "));
    out.others = {{"function", "compare"}, {"calls", call_list}, {"unit", *unit}, {"time_span", *span}, {"provenance", provenance}};
    if (!errors.empty()) out.others["errors"] = errors;
    add_notes(out.others, notes);
    return out;
}

// ---- default registry ----------------------------------------------------

Registry default_registry(const Backends& b) {
    Registry reg(b.gazetteer);
    auto gz = b.gazetteer;
    auto clients = b.clients;
    auto figures = b.figures;
    auto docs = b.docs;
    auto need_clients = [clients] {
        if (!clients) throw Error(ErrorCode::ProviderUnavailable, "no data clients configured", {{"retryable", false}});
        return clients;
    };

    const auto begin_p = param("begin", ParamType::Date, true, "First day, YYYY-MM-DD (UTC)");
    const auto end_p = param("end", ParamType::Date, true, "Last day inclusive, YYYY-MM-DD (UTC)");
    const auto datum_p = enum_param("datum", kDatums, "MSL", "Vertical datum");

    reg.add({"get_water_level",
             "Observed water level at a NOAA CO-OPS tide station, six-minute or hourly, with summary statistics",
             {param("station", ParamType::Station, true, "CO-OPS station id or place name"), begin_p, end_p, datum_p,
              enum_param("interval", {"hourly", "six_minute"}, "hourly", "Sampling interval"),
              enum_param("stat", kSeriesStats, "full_series", "Statistic to report"), label_param()},
             [gz, need_clients, figures](const CallContext& ctx) {
                 const bool six = ctx.args["interval"] == "six_minute";
                 const auto tr = window(ctx.args, six ? Resolution::SixMinute : Resolution::Hourly,
                                        six ? kMaxSixMinuteDays : kMaxHourlyDays);
                 const auto id = ctx.args["station"].get<std::string>();
                 auto f = need_clients()->fetch_water_level(id, tr, ctx.args["datum"].get<std::string>(), tr.resolution);
                 auto label = station_label(*gz, ctx.args, id);
                 SeriesOutcome o{label, fmt::format("{} (station {})", label, id), six ? "six-minute water level" : "hourly water level",
                                 std::move(f.data), std::move(f.provenance), {{"station", id}}};
                 return series_response(ctx, std::move(o), figures.get(), false);
             }});

    reg.add({"get_monthly_mean_sea_level",
             "Monthly mean sea level at a NOAA CO-OPS tide station, with summary statistics and linear trend",
             {param("station", ParamType::Station, true, "CO-OPS station id or place name"), begin_p, end_p, datum_p,
              enum_param("stat", kSeriesStats, "full_series", "Statistic to report"), label_param()},
             [gz, need_clients, figures](const CallContext& ctx) {
                 const auto tr = window(ctx.args, Resolution::Monthly, 0);
                 const auto id = ctx.args["station"].get<std::string>();
                 auto f = need_clients()->fetch_monthly_mean(id, tr, ctx.args["datum"].get<std::string>());
                 auto label = station_label(*gz, ctx.args, id);
                 SeriesOutcome o{label, fmt::format("{} (station {})", label, id), "monthly mean sea level", std::move(f.data),
                                 std::move(f.provenance), {{"station", id}}};
                 return series_response(ctx, std::move(o), figures.get(), true);
             }});

    reg.add({"get_cora_series",
             "Hourly reanalysis water level (zeta) from NOAA NOS CORA at the grid node nearest a location",
             {param("location", ParamType::Location, true, "Place name, station id, or 'lat,lon'"), begin_p, end_p,
              enum_param("stat", kSeriesStats, "full_series", "Statistic to report"), label_param()},
             [need_clients, figures](const CallContext& ctx) {
                 const auto tr = window(ctx.args, Resolution::Hourly, kMaxCoraDays);
                 const auto& loc = ctx.args["location"];
                 GeoPoint p{loc["lat"].get<double>(), loc["lon"].get<double>()};
                 auto f = need_clients()->fetch_cora_series(p, tr);
                 const auto label = str_or(ctx.args, "label", loc["name"].get<std::string>());
                 json node = {{"id", f.node_id}, {"lat", f.node.lat}, {"lon", f.node.lon}, {"distance_km", f.distance_km}};
                 SeriesOutcome o{label,
                                 fmt::format("{} (CORA node {}, {} km away)", label, f.node_id, format_fixed(f.distance_km)),
                                 "hourly reanalysis water level", std::move(f.series), std::move(f.provenance),
                                 {{"node", node}, {"location", loc}}};
                 return series_response(ctx, std::move(o), figures.get(), false);
             }});

    {
        auto threshold = param("threshold", ParamType::Number, false, "Report the share of ocean cells at or above this temperature (°C)");
        threshold.min = -5.0;
        threshold.max = 45.0;
        reg.add({"get_sst",
                 "Daily sea surface temperature map from NOAA Coral Reef Watch over a region, with grid statistics",
                 {param("region", ParamType::Region, true, "Region name or key, or 'lat_min,lat_max,lon_min,lon_max'"),
                  param("date", ParamType::Date, true, "Day, YYYY-MM-DD (UTC)"), threshold,
                  enum_param("stat", kGridStats, "full_series", "Statistic to report"), label_param()},
                 [need_clients, figures](const CallContext& ctx) {
                     const auto& reg_j = ctx.args["region"];
                     BBox box{reg_j["lat_min"].get<double>(), reg_j["lat_max"].get<double>(), reg_j["lon_min"].get<double>(),
                              reg_j["lon_max"].get<double>()};
                     const auto label = str_or(ctx.args, "label", reg_j["name"].get<std::string>());
                     const auto date = *parse_timestamp(ctx.args["date"].get<std::string>());
                     const std::string key = reg_j["key"].is_string() ? reg_j["key"].get<std::string>() : label;
                     auto f = need_clients()->fetch_sst(box, date, key);
                     const auto gs = grid_stats(f.data);
                     const std::string stat = ctx.args["stat"].get<std::string>();
                     const std::string u = std::string(unit_symbol(f.data.unit()));
                     const std::string src = fmt::format("{}, {}", f.provenance.source_name, f.provenance.dataset_id);
                     const std::string day = format_date(date);

                     json data = {{"label", label},
                                  {"variable", std::string(to_string(f.data.variable()))},
                                  {"unit", std::string(unit_code(f.data.unit()))},
                                  {"date", day},
                                  {"stat", stat},
                                  {"min", gs.min},
                                  {"max", gs.max},
                                  {"mean", gs.mean},
                                  {"std", gs.std},
                                  {"count", gs.count},
                                  {"masked_count", gs.masked_count},
                                  {"argmin", {{"lat", gs.argmin.lat}, {"lon", gs.argmin.lon}}},
                                  {"argmax", {{"lat", gs.argmax.lat}, {"lon", gs.argmax.lon}}},
                                  {"grid", {{"rows", f.data.rows()}, {"cols", f.data.cols()}, {"bbox", {box.lat_min, box.lat_max, box.lon_min, box.lon_max}}}},
                                  {"region", reg_j}};
                     std::string text;
                     if (stat == "max" || stat == "min") {
                         const bool mx = stat == "max";
                         const auto v = mx ? gs.max : gs.min;
                         const auto at = mx ? gs.argmax : gs.argmin;
                         data["value"] = v;
                         text = fmt::format("The {} sea surface temperature over {} on {} was {} {} at ({:.3f}, {:.3f}) ({}).",
                                            mx ? "maximum" : "minimum", label, day, format_fixed(v), u, at.lat, at.lon, src);
                     } else if (stat == "mean" || stat == "std") {
                         const auto v = stat == "mean" ? gs.mean : gs.std;
                         data["value"] = v;
                         text = fmt::format("The {} sea surface temperature over {} on {} was {} {} across {} ocean cells ({}).",
                                            stat == "mean" ? "mean" : "standard deviation of", label, day, format_fixed(v), u,
                                            gs.count, src);
                     } else {
                         text = fmt::format("Sea surface temperature over {} on {} ranged from {} {} to {} {}, mean {} {}, across {} ocean cells with {} cells masked as land or missing ({}).",
                                            label, day, format_fixed(gs.min), u, format_fixed(gs.max), u, format_fixed(gs.mean), u,
                                            gs.count, gs.masked_count, src);
                     }
                     f.provenance.processing_steps.push_back(
                         fmt::format("grid statistics over {} valid cells, {} masked", gs.count, gs.masked_count));
                     if (ctx.args.contains("threshold")) {
                         const double t = ctx.args["threshold"].get<double>();
                         auto th = threshold_mask(f.data, t);
                         data["threshold"] = {{"value", t},
                                              {"fraction", th.fraction},
                                              {"percent", th.fraction * 100.0},
                                              {"exceed_count", th.exceed_count},
                                              {"unmasked_count", th.unmasked_count}};
                         text += fmt::format(" {}% of ocean cells were at or above {} {}.", format_fixed(th.fraction * 100.0),
                                             format_fixed(t), u);
                         f.provenance.processing_steps.push_back(fmt::format("threshold mask at {} {}", format_fixed(t), u));
                     }
                     ToolResponse r;
                     if (figures && ctx.render) {
                         r.images.push_back(render_map(*figures, f.data, Colormap::Thermal,
                                                       fmt::format("Sea surface temperature, {}, {}", label, day)));
                         f.provenance.processing_steps.push_back("rendered map figure " + r.images.back().hash.substr(0, 12));
                     }
                     r.text = std::move(text);
                     r.json_data = std::move(data);
                     r.others = {{"unit", std::string(unit_code(f.data.unit()))},
                                 {"time_span", encode(f.provenance.time_span)},
                                 {"provenance", json::array({encode(f.provenance)})}};
                     return r;
                 }});
    }

    {
        auto k = param("k", ParamType::Integer, false, "Number of passages");
        k.min = 1;
        k.max = 20;
        k.default_value = json(4);
        reg.add({"search_documents",
                 "Ranked passages from the local document corpus for a question",
                 {param("query", ParamType::Text, true, "Question or keywords"), k},
                 [docs](const CallContext& ctx) {
                     if (!docs) throw Error(ErrorCode::ProviderUnavailable, "no document store configured", {{"retryable", false}});
                     const auto q = ctx.args["query"].get<std::string>();
                     const auto n = ctx.args["k"].get<std::size_t>();
                     auto hits = docs->search(q, n);
                     json results = json::array();
                     std::vector<std::string> lines;
                     int y0 = 9999, y1 = 0;
                     for (const auto& h : hits) {
                         const auto& m = h.chunk.meta;
                         results.push_back({{"doc_id", h.chunk.doc_id},
                                            {"chunk_index", h.chunk.chunk_index},
                                            {"title", m.title},
                                            {"year", m.year ? json(*m.year) : json(nullptr)},
                                            {"origin", m.origin},
                                            {"score", h.score},
                                            {"text", h.chunk.text}});
                         if (m.year) {
                             y0 = std::min(y0, *m.year);
                             y1 = std::max(y1, *m.year);
                         }
                         lines.push_back(fmt::format("{}{} (score {})", m.title.empty() ? h.chunk.doc_id : m.title,
                                                     m.year ? fmt::format(", {}", *m.year) : "", format_fixed(h.score)));
                     }
                     if (y0 > y1) y0 = y1 = 1970;
                     TimeRange span{make_timestamp(y0, 1, 1), end_of_day(make_timestamp(y1, 12, 31)), Resolution::Daily};
                     Provenance p;
                     p.source_name = "local document store";
                     p.dataset_id = "docstore/" + docs->embedder().name();
                     p.station_or_grid = fmt::format("corpus of {} chunks", docs->size());
                     p.unit = "1";
                     p.time_span = span;
                     p.retrieved_at = span.end;
                     p.processing_steps = {fmt::format("embedded query with {} ({} dimensions)", docs->embedder().name(),
                                                       docs->embedder().dimension()),
                                           fmt::format("exhaustive cosine ranking over {} chunks, top {}", docs->size(), n),
                                           "time span covers the publication years of the returned documents"};
                     ToolResponse r;
                     r.text = fmt::format("Top {} passages for \"{}\": {}.", hits.size(), q, fmt::join(lines, "; "));
                     r.json_data = {{"query", q}, {"k", n}, {"results", results}};
                     r.others = {{"unit", "1"}, {"time_span", encode(span)}, {"provenance", json::array({encode(p)})}};
                     return r;
                 }});
    }
    return reg;
}

}  // namespace oceanqa
