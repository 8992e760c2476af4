// SPDX-License-Identifier: Apache-2.0
#include "oceanqa/serialization.hpp"

#include <cmath>

#include "oceanqa/error.hpp"

namespace oceanqa {

namespace {

[[noreturn]] void bad(std::string_view field, std::string message) {
    throw Error(ErrorCode::InvalidValue, std::move(message), {{"field", std::string(field)}});
}

const json& field(const json& j, const char* name) {
    if (!j.is_object()) bad(name, std::string("expected object containing '") + name + "'");
    auto it = j.find(name);
    if (it == j.end()) bad(name, std::string("missing field '") + name + "'");
    return *it;
}

std::string get_string(const json& j, const char* name) {
    const auto& v = field(j, name);
    if (!v.is_string()) bad(name, std::string("field '") + name + "' must be a string");
    return v.get<std::string>();
}

double get_number(const json& j, const char* name) {
    const auto& v = field(j, name);
    if (!v.is_number()) bad(name, std::string("field '") + name + "' must be a number");
    return v.get<double>();
}

std::optional<std::string> get_optional_string(const json& j, const char* name) {
    auto it = j.find(name);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) bad(name, std::string("field '") + name + "' must be a string or null");
    return it->get<std::string>();
}

Unit get_unit(const json& j) {
    auto code = get_string(j, "unit");
    auto unit = unit_from_code(code);
    if (!unit) bad("unit", "unknown unit code '" + code + "'");
    return *unit;
}

Variable get_variable(const json& j) {
    auto name = get_string(j, "variable");
    auto v = variable_from_string(name);
    if (!v) bad("variable", "unknown variable '" + name + "'");
    return *v;
}

std::vector<double> get_doubles(const json& j, const char* name) {
    const auto& arr = field(j, name);
    if (!arr.is_array()) bad(name, std::string("field '") + name + "' must be an array");
    std::vector<double> out;
    out.reserve(arr.size());
    for (const auto& e : arr) {
        if (!e.is_number()) bad(name, std::string("field '") + name + "' must hold numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

void masked_values(const json& arr, const char* name, std::vector<double>& values, std::vector<std::uint8_t>& valid) {
    if (!arr.is_array()) bad(name, std::string("field '") + name + "' must be an array");
    values.reserve(arr.size());
    valid.reserve(arr.size());
    for (const auto& e : arr) {
        if (e.is_null()) {
            values.push_back(std::nan(""));
            valid.push_back(0);
        } else if (e.is_number()) {
            values.push_back(e.get<double>());
            valid.push_back(1);
        } else {
            bad(name, std::string("field '") + name + "' must hold numbers or null");
        }
    }
}

}  // namespace

std::string_view to_string(FigureKind k) noexcept { return k == FigureKind::Map ? "Map" : "TimeSeries"; }

json encode(Timestamp ts) { return format_iso(ts); }

Timestamp decode_timestamp(const json& j) {
    if (!j.is_string()) bad("timestamp", "timestamp must be an ISO-8601 string");
    auto ts = parse_timestamp(j.get<std::string>());
    if (!ts) bad("timestamp", "unparseable timestamp '" + j.get<std::string>() + "'");
    return *ts;
}

json encode(const TimeRange& tr) {
    return {{"start", encode(tr.start)}, {"end", encode(tr.end)}, {"resolution", std::string(to_string(tr.resolution))}};
}

TimeRange decode_time_range(const json& j) {
    TimeRange tr;
    tr.start = decode_timestamp(field(j, "start"));
    tr.end = decode_timestamp(field(j, "end"));
    auto res = get_string(j, "resolution");
    auto r = resolution_from_string(res);
    if (!r) bad("resolution", "unknown resolution '" + res + "'");
    tr.resolution = *r;
    return tr;
}

json encode(const SpatialSelector& sel) {
    struct Visitor {
        json operator()(const StationRef& s) const { return {{"kind", "StationRef"}, {"id", s.id}}; }
        json operator()(const GeoPoint& p) const { return {{"kind", "Point"}, {"lat", p.lat}, {"lon", p.lon}}; }
        json operator()(const BBox& b) const {
            return {{"kind", "BBox"},       {"lat_min", b.lat_min}, {"lat_max", b.lat_max},
                    {"lon_min", b.lon_min}, {"lon_max", b.lon_max}};
        }
        json operator()(const NamedRegion& r) const { return {{"kind", "NamedRegion"}, {"key", r.key}}; }
    };
    return std::visit(Visitor{}, sel);
}

SpatialSelector decode_selector(const json& j) {
    auto kind = get_string(j, "kind");
    if (kind == "StationRef") return StationRef{get_string(j, "id")};
    if (kind == "Point") return GeoPoint{get_number(j, "lat"), get_number(j, "lon")};
    if (kind == "BBox")
        return BBox{get_number(j, "lat_min"), get_number(j, "lat_max"), get_number(j, "lon_min"),
                    get_number(j, "lon_max")};
    if (kind == "NamedRegion") return NamedRegion{get_string(j, "key")};
    bad("kind", "unknown selector kind '" + kind + "'");
}

json encode(const Station& st) {
    return {{"id", st.id}, {"name", st.name}, {"lat", st.lat}, {"lon", st.lon}, {"supported_datums", st.supported_datums}};
}

Station decode_station(const json& j) {
    Station st;
    st.id = get_string(j, "id");
    st.name = get_string(j, "name");
    st.lat = get_number(j, "lat");
    st.lon = get_number(j, "lon");
    const auto& datums = field(j, "supported_datums");
    if (!datums.is_array()) bad("supported_datums", "supported_datums must be an array");
    for (const auto& d : datums) {
        if (!d.is_string()) bad("supported_datums", "datum codes must be strings");
        st.supported_datums.push_back(d.get<std::string>());
    }
    return st;
}

json encode(const Series& s) {
    json ts = json::array();
    json vs = json::array();
    for (std::size_t i = 0; i < s.size(); ++i) {
        ts.push_back(format_iso(s.timestamps()[i]));
        vs.push_back(s.valid(i) ? json(s.values()[i]) : json(nullptr));
    }
    return {{"variable", std::string(to_string(s.variable()))},
            {"unit", std::string(unit_code(s.unit()))},
            {"datum", s.datum() ? json(*s.datum()) : json(nullptr)},
            {"timestamps", std::move(ts)},
            {"values", std::move(vs)}};
}

Series decode_series(const json& j) {
    const auto& ts_json = field(j, "timestamps");
    if (!ts_json.is_array()) bad("timestamps", "timestamps must be an array");
    std::vector<Timestamp> ts;
    ts.reserve(ts_json.size());
    for (const auto& t : ts_json) ts.push_back(decode_timestamp(t));
    std::vector<double> values;
    std::vector<std::uint8_t> valid;
    masked_values(field(j, "values"), "values", values, valid);
    return Series(get_variable(j), get_unit(j), get_optional_string(j, "datum"), std::move(ts), std::move(values),
                  std::move(valid));
}

json encode(const GridSlice& g) {
    json vs = json::array();
    for (std::size_t i = 0; i < g.cell_count(); ++i)
        vs.push_back(g.valid_mask()[i] ? json(g.values()[i]) : json(nullptr));
    return {{"variable", std::string(to_string(g.variable()))},
            {"unit", std::string(unit_code(g.unit()))},
            {"timestamp", format_iso(g.timestamp())},
            {"lats", std::vector<double>(g.lats().begin(), g.lats().end())},
            {"lons", std::vector<double>(g.lons().begin(), g.lons().end())},
            {"values", std::move(vs)}};
}

GridSlice decode_grid(const json& j) {
    std::vector<double> values;
    std::vector<std::uint8_t> valid;
    masked_values(field(j, "values"), "values", values, valid);
    return GridSlice(get_variable(j), get_unit(j), decode_timestamp(field(j, "timestamp")), get_doubles(j, "lats"),
                     get_doubles(j, "lons"), std::move(values), std::move(valid));
}

json encode(const SummaryStats& s) {
    return {{"min", s.min},
            {"max", s.max},
            {"mean", s.mean},
            {"std", s.std},
            {"argmin_time", format_iso(s.argmin_time)},
            {"argmax_time", format_iso(s.argmax_time)},
            {"count", s.count}};
}

SummaryStats decode_summary_stats(const json& j) {
    SummaryStats s;
    s.min = get_number(j, "min");
    s.max = get_number(j, "max");
    s.mean = get_number(j, "mean");
    s.std = get_number(j, "std");
    s.argmin_time = decode_timestamp(field(j, "argmin_time"));
    s.argmax_time = decode_timestamp(field(j, "argmax_time"));
    const auto& c = field(j, "count");
    if (!c.is_number_unsigned() && !(c.is_number_integer() && c.get<long long>() >= 0))
        bad("count", "count must be a non-negative integer");
    s.count = c.get<std::size_t>();
    return s;
}

json encode(const Provenance& p) {
    return {{"source_name", p.source_name},
            {"dataset_id", p.dataset_id},
            {"station_or_grid", p.station_or_grid},
            {"unit", p.unit},
            {"datum", p.datum ? json(*p.datum) : json(nullptr)},
            {"time_span", encode(p.time_span)},
            {"retrieved_at", format_iso(p.retrieved_at)},
            {"processing_steps", p.processing_steps}};
}

Provenance decode_provenance(const json& j) {
    Provenance p;
    p.source_name = get_string(j, "source_name");
    p.dataset_id = get_string(j, "dataset_id");
    p.station_or_grid = get_string(j, "station_or_grid");
    p.unit = get_string(j, "unit");
    p.datum = get_optional_string(j, "datum");
    p.time_span = decode_time_range(field(j, "time_span"));
    p.retrieved_at = decode_timestamp(field(j, "retrieved_at"));
    const auto& steps = field(j, "processing_steps");
    if (!steps.is_array()) bad("processing_steps", "processing_steps must be an array");
    for (const auto& s : steps) {
        if (!s.is_string()) bad("processing_steps", "processing steps must be strings");
        p.processing_steps.push_back(s.get<std::string>());
    }
    return p;
}

json encode(const FigureRef& f) {
    return {{"hash", f.hash}, {"path", f.path}, {"alt_text", f.alt_text}, {"kind", std::string(to_string(f.kind))}};
}

FigureRef decode_figure(const json& j) {
    FigureRef f;
    f.hash = get_string(j, "hash");
    f.path = get_string(j, "path");
    f.alt_text = get_string(j, "alt_text");
    auto kind = get_string(j, "kind");
    if (kind == "Map")
        f.kind = FigureKind::Map;
    else if (kind == "TimeSeries")
        f.kind = FigureKind::TimeSeries;
    else
        bad("kind", "unknown figure kind '" + kind + "'");
    return f;
}

json encode(const ToolResponse& r) {
    json images = json::array();
    for (const auto& f : r.images) images.push_back(encode(f));
    return {{"text", r.text}, {"images", std::move(images)}, {"json_data", r.json_data}, {"others", r.others}};
}

ToolResponse decode_tool_response(const json& j) {
    ToolResponse r;
    r.text = get_string(j, "text");
    const auto& images = field(j, "images");
    if (!images.is_array()) bad("images", "images must be an array");
    for (const auto& f : images) r.images.push_back(decode_figure(f));
    r.json_data = field(j, "json_data");
    r.others = field(j, "others");
    return r;
}

std::vector<std::string> validate_tool_response(const json& j) {
    std::vector<std::string> problems;
    if (!j.is_object()) return {"payload must be a JSON object"};
    for (const char* key : {"text", "images", "json_data", "others"})
        if (!j.contains(key)) problems.push_back(std::string("missing top-level key '") + key + "'");
    if (j.size() != 4) problems.push_back("payload must have exactly four top-level keys");
    if (!problems.empty()) return problems;

    if (!j["text"].is_string()) problems.emplace_back("text must be a string");
    if (!j["images"].is_array()) {
        problems.emplace_back("images must be an array");
    } else {
        for (const auto& img : j["images"]) {
            try {
                decode_figure(img);
            } catch (const Error& e) {
                problems.push_back(std::string("images entry invalid: ") + e.what());
            }
        }
    }
    if (!j["json_data"].is_object()) problems.emplace_back("json_data must be an object");
    const auto& others = j["others"];
    if (!others.is_object()) {
        problems.emplace_back("others must be an object");
        return problems;
    }
    if (j["json_data"].is_object() && !j["json_data"].empty()) {
        if (!others.contains("unit") || !others["unit"].is_string() || others["unit"].get<std::string>().empty())
            problems.emplace_back("others.unit must be populated when json_data is non-empty");
        if (!others.contains("time_span")) {
            problems.emplace_back("others.time_span must be populated when json_data is non-empty");
        } else {
            try {
                auto tr = decode_time_range(others["time_span"]);
                if (!(tr.start <= tr.end)) problems.emplace_back("others.time_span start must not exceed end");
            } catch (const Error& e) {
                problems.push_back(std::string("others.time_span invalid: ") + e.what());
            }
        }
        if (!others.contains("provenance") || !others["provenance"].is_array() || others["provenance"].empty()) {
            problems.emplace_back("others.provenance must list at least one record");
        }
    }
    if (others.contains("provenance") && others["provenance"].is_array()) {
        for (const auto& p : others["provenance"]) {
            try {
                auto prov = decode_provenance(p);
                if (prov.processing_steps.empty())
                    problems.push_back("provenance for " + prov.dataset_id + " has no processing steps");
                if (prov.dataset_id.empty()) problems.emplace_back("provenance dataset_id is empty");
            } catch (const Error& e) {
                problems.push_back(std::string("provenance invalid: ") + e.what());
            }
        }
    }
    return problems;
}

}  // namespace oceanqa
