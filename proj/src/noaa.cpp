// SPDX-License-Identifier: Apache-2.0
#include "oceanqa/noaa.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "oceanqa/analysis.hpp"
#include "oceanqa/error.hpp"
#include "oceanqa/netcdf.hpp"
#include "oceanqa/text_util.hpp"

namespace oceanqa {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& field, const std::string& what) {
    throw Error(ErrorCode::ConfigError, "providers config: " + what, {{"field", field}});
}

std::string excerpt(std::string_view body) {
    std::string s(body.substr(0, 200));
    for (auto& c : s)
        if (c == '\n' || c == '\r') c = ' ';
    return s;
}

[[noreturn]] void provider_error(const std::string& what, std::string_view body, bool retryable = false) {
    throw Error(ErrorCode::ProviderError, what, {{"body_excerpt", excerpt(body)}, {"retryable", retryable}});
}

/// Maps a CO-OPS error message onto the client error family.
[[noreturn]] void coops_message_error(const std::string& message) {
    const auto lower = to_lower(message);
    if (lower.find("no data was found") != std::string::npos)
        throw Error(ErrorCode::GapOnly, "provider reports no data: " + message, {{"provider_message", message}});
    if (lower.find("wrong station id") != std::string::npos || lower.find("station not found") != std::string::npos)
        throw Error(ErrorCode::StationUnknown, "provider does not know the station: " + message,
                    {{"provider_message", message}});
    throw Error(ErrorCode::ProviderError, "provider error: " + message,
                {{"provider_message", message}, {"retryable", false}, {"body_excerpt", excerpt(message)}});
}

void check_status(const RawRecord& rec) {
    if (rec.status >= 200 && rec.status < 300) return;
    throw Error(ErrorCode::ProviderError, fmt::format("provider returned HTTP {}", rec.status),
                {{"status", rec.status}, {"url", rec.url}, {"body_excerpt", excerpt(rec.bytes)},
                 {"retryable", rec.status == 429 || rec.status >= 500}});
}

std::string coops_time(Timestamp t) {
    auto c = to_civil(t);
    return fmt::format("{:04d}{:02d}{:02d} {:02d}:{:02d}", c.year, c.month, c.day, c.hour, c.minute);
}

bool closed_before(Timestamp end, Timestamp now) { return end + std::chrono::days{2} < now; }

Unit coops_unit(const std::string& units) { return units == "english" ? Unit::Feet : Unit::Meters; }

std::string chunk_note(std::string_view product, std::size_t chunks, int max_days) {
    return fmt::format("requested {} in {} request{} of at most {} days; chunks concatenated in time order", product,
                       chunks, chunks == 1 ? "" : "s", max_days);
}

struct Merged {
    std::map<Timestamp, std::pair<double, bool>> points;
    Timestamp retrieved{};

    void add(const Series& s) {
        for (std::size_t i = 0; i < s.size(); ++i)
            points.try_emplace(s.timestamps()[i], s.values()[i], s.valid(i));
    }
    Series build(Variable v, Unit u, const std::optional<std::string>& datum, const TimeRange& window) const {
        std::vector<Timestamp> ts;
        std::vector<double> vals;
        std::vector<std::uint8_t> ok;
        for (const auto& [t, p] : points) {
            if (t < window.start || t > window.end) continue;
            ts.push_back(t);
            vals.push_back(p.first);
            ok.push_back(p.second ? 1 : 0);
        }
        return Series(v, u, datum, std::move(ts), std::move(vals), std::move(ok));
    }
};

Series convert_series(const Series& s, Unit to) {
    std::vector<double> vals(s.values().begin(), s.values().end());
    for (std::size_t i = 0; i < vals.size(); ++i)
        if (s.valid(i)) vals[i] = convert_value(vals[i], s.unit(), to);
    return Series(s.variable(), to, s.datum(), {s.timestamps().begin(), s.timestamps().end()}, std::move(vals),
                  {s.valid_mask().begin(), s.valid_mask().end()});
}

}  // namespace

ProviderConfig ProviderConfig::from_json(const json& j) {
    ProviderConfig c;
    try {
        c.version = j.value("version", "");
        const auto& co = j.at("coops");
        c.coops.source_name = co.at("source_name").get<std::string>();
        c.coops.base_url = co.at("base_url").get<std::string>();
        c.coops.application = co.value("application", "oceanqa");
        c.coops.units = co.value("units", "metric");
        c.coops.time_zone = co.value("time_zone", "gmt");
        for (const auto& [res, p] : co.at("products").items()) {
            auto r = resolution_from_string(res);
            if (!r) config_error("coops.products", "unknown resolution " + res);
            CoopsProduct prod{p.at("product").get<std::string>(), p.value("format", "json"), p.at("max_days").get<int>(),
                              p.at("dataset_id").get<std::string>()};
            if (prod.max_days < 1) config_error("coops.products." + res + ".max_days", "max_days must be >= 1");
            c.coops.products[*r] = prod;
        }
        for (const auto& [prod, pos] : co.at("bad_flag_positions").items())
            c.coops.bad_flag_positions[prod] = pos.get<std::vector<int>>();
        c.coops.monthly_value_column = co.value("monthly_value_column", "MSL");
        const auto& cora = j.at("cora");
        c.cora.source_name = cora.at("source_name").get<std::string>();
        c.cora.base_url = cora.at("base_url").get<std::string>();
        c.cora.variable = cora.value("variable", "zeta");
        c.cora.dataset_id = cora.at("dataset_id").get<std::string>();
        c.cora.search_radius_km = cora.value("search_radius_km", 50.0);
        c.cora.max_days = cora.value("max_days", 366);
        if (!(c.cora.search_radius_km > 0)) config_error("cora.search_radius_km", "radius must be positive");
        if (c.cora.max_days < 1) config_error("cora.max_days", "max_days must be >= 1");
        const auto& crw = j.at("crw");
        c.crw.source_name = crw.at("source_name").get<std::string>();
        c.crw.base_url = crw.at("base_url").get<std::string>();
        c.crw.variable = crw.value("variable", "CRW_SST");
        c.crw.dataset_id = crw.at("dataset_id").get<std::string>();
        c.crw.time_of_day = crw.value("time_of_day", "12:00:00");
    } catch (const json::exception& e) {
        config_error("providers", e.what());
    }
    for (auto r : {Resolution::SixMinute, Resolution::Hourly, Resolution::Monthly})
        if (!c.coops.products.count(r)) config_error("coops.products", fmt::format("missing product for {}", to_string(r)));
    return c;
}

ProviderConfig ProviderConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot read providers config " + path.string(), {{"path", path.string()}});
    try {
        return from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, "providers config is not JSON: " + std::string(e.what()),
                    {{"path", path.string()}});
    }
}

std::vector<std::pair<Timestamp, Timestamp>> split_window(Timestamp start, Timestamp end, int max_days) {
    std::vector<std::pair<Timestamp, Timestamp>> out;
    const auto span = std::chrono::days{max_days};
    for (auto s = start; s <= end; s += span) {
        auto e = std::min(end, s + span - std::chrono::minutes{1});
        out.emplace_back(s, e);
    }
    return out;
}

Series parse_coops_json(const std::string& body, const std::vector<int>& bad_flag_positions,
                        const std::optional<std::string>& datum, CoopsParseStats* stats, std::string* station_name) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception&) {
        provider_error("CO-OPS response is not JSON", body);
    }
    if (!j.is_object()) provider_error("CO-OPS response is not a JSON object", body);
    if (j.contains("error")) {
        const auto& e = j["error"];
        coops_message_error(e.is_object() ? e.value("message", e.dump()) : e.dump());
    }
    if (!j.contains("data") || !j["data"].is_array()) provider_error("CO-OPS response has no data array", body);
    if (station_name && j.contains("metadata") && j["metadata"].is_object())
        *station_name = j["metadata"].value("name", "");

    CoopsParseStats local;
    std::map<Timestamp, std::pair<double, bool>> points;
    for (const auto& row : j["data"]) {
        if (!row.is_object() || !row.contains("t") || !row["t"].is_string()) provider_error("CO-OPS row without time", body);
        auto t = parse_timestamp(row["t"].get<std::string>());
        if (!t) provider_error("CO-OPS row with unparseable time " + row["t"].get<std::string>(), body);
        double v = std::nan("");
        bool ok = false;
        const std::string raw = row.contains("v") && row["v"].is_string() ? trim(row["v"].get<std::string>()) : "";
        if (!raw.empty()) {
            try {
                std::size_t used = 0;
                v = std::stod(raw, &used);
                ok = used == raw.size() && std::isfinite(v);
            } catch (const std::exception&) {
                ok = false;
            }
        }
        if (!ok) {
            ++local.empty;
        } else if (row.contains("f") && row["f"].is_string()) {
            auto flags = split(row["f"].get<std::string>(), ',');
            for (int pos : bad_flag_positions)
                if (pos >= 0 && static_cast<std::size_t>(pos) < flags.size() && trim(flags[pos]) == "1") ok = false;
            if (!ok) ++local.flagged;
        }
        if (row.contains("q") && row["q"].is_string()) {
            if (row["q"] == "p") ++local.preliminary;
            if (row["q"] == "v") ++local.verified;
        }
        points.try_emplace(*t, v, ok);
    }
    if (stats) *stats = local;
    std::vector<Timestamp> ts;
    std::vector<double> vals;
    std::vector<std::uint8_t> valid;
    for (const auto& [t, p] : points) {
        ts.push_back(t);
        vals.push_back(p.first);
        valid.push_back(p.second ? 1 : 0);
    }
    return Series(Variable::WaterLevel, Unit::Meters, datum, std::move(ts), std::move(vals), std::move(valid));
}

Series parse_coops_monthly_csv(const std::string& body, const std::string& column, const std::optional<std::string>& datum) {
    const auto head = to_lower(trim(body.substr(0, 400)));
    if (head.rfind("error", 0) == 0 || head.find("no data was found") != std::string::npos ||
        head.find("wrong station id") != std::string::npos)
        coops_message_error(trim(body.substr(0, 400)));
    std::istringstream in(body);
    std::string line;
    if (!std::getline(in, line)) provider_error("empty monthly mean CSV", body);
    auto header = split(line, ',');
    int year_col = -1, month_col = -1, value_col = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        auto h = trim(header[i]);
        if (h == "Year") year_col = static_cast<int>(i);
        if (h == "Month") month_col = static_cast<int>(i);
        if (h == column) value_col = static_cast<int>(i);
    }
    if (year_col < 0 || month_col < 0 || value_col < 0)
        provider_error("monthly mean CSV lacks Year/Month/" + column + " columns", body);
    std::map<Timestamp, std::pair<double, bool>> points;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto cols = split(line, ',');
        const auto need = static_cast<std::size_t>(std::max({year_col, month_col, value_col}));
        if (cols.size() <= need) provider_error("short monthly mean CSV row", line);
        int y = 0, m = 0;
        try {
            y = std::stoi(trim(cols[year_col]));
            m = std::stoi(trim(cols[month_col]));
        } catch (const std::exception&) {
            provider_error("bad Year/Month in monthly mean CSV", line);
        }
        if (m < 1 || m > 12 || y < 1800 || y > 2200) provider_error("bad Year/Month in monthly mean CSV", line);
        double v = std::nan("");
        bool ok = false;
        auto raw = trim(cols[value_col]);
        if (!raw.empty()) {
            try {
                std::size_t used = 0;
                v = std::stod(raw, &used);
                ok = used == raw.size() && std::isfinite(v);
            } catch (const std::exception&) {
            }
        }
        points.try_emplace(make_timestamp(y, static_cast<unsigned>(m), 1), v, ok);
    }
    std::vector<Timestamp> ts;
    std::vector<double> vals;
    std::vector<std::uint8_t> valid;
    for (const auto& [t, p] : points) {
        ts.push_back(t);
        vals.push_back(p.first);
        valid.push_back(p.second ? 1 : 0);
    }
    return Series(Variable::MonthlyMeanSeaLevel, Unit::Meters, datum, std::move(ts), std::move(vals), std::move(valid));
}

std::vector<Timestamp> decode_cf_times(const std::vector<double>& values, const std::string& units) {
    const auto pos = units.find(" since ");
    if (pos == std::string::npos) throw Error(ErrorCode::FormatError, "time units lack 'since': " + units, {{"units", units}});
    const auto unit = to_lower(trim(units.substr(0, pos)));
    auto epoch_text = trim(units.substr(pos + 7));
    auto epoch = parse_timestamp(epoch_text);
    if (!epoch && epoch_text.size() > 10) epoch = parse_timestamp(epoch_text.substr(0, 19));
    if (!epoch) throw Error(ErrorCode::FormatError, "unparseable time epoch: " + units, {{"units", units}});
    double scale = 0;
    if (unit == "seconds" || unit == "second" || unit == "s") scale = 1;
    else if (unit == "minutes" || unit == "minute") scale = 60;
    else if (unit == "hours" || unit == "hour" || unit == "h") scale = 3600;
    else if (unit == "days" || unit == "day" || unit == "d") scale = 86400;
    else throw Error(ErrorCode::FormatError, "unsupported time unit: " + units, {{"units", units}});
    std::vector<Timestamp> out;
    out.reserve(values.size());
    for (double v : values) {
        const double secs = std::round(v * scale);
        if (!std::isfinite(secs) || std::abs(secs) > 1e11)
            throw Error(ErrorCode::FormatError, "time value out of range", {{"units", units}});
        out.push_back(*epoch + std::chrono::seconds{static_cast<long long>(secs)});
    }
    return out;
}

NoaaClients::NoaaClients(std::shared_ptr<Transport> transport, ProviderConfig config, CoverageTable coverage)
    : transport_(std::move(transport)), config_(std::move(config)), coverage_(std::move(coverage)) {
    if (!transport_) throw Error(ErrorCode::ConfigError, "clients need a transport", {{"field", "transport"}});
}

Fetched<Series> NoaaClients::fetch_water_level(const std::string& station_id, const TimeRange& tr,
                                               const std::string& datum, Resolution interval) const {
    if (station_id.empty() || !std::all_of(station_id.begin(), station_id.end(), ::isdigit))
        throw Error(ErrorCode::StationUnknown, "station ids are numeric: '" + station_id + "'", {{"station", station_id}});
    TimeRange req = tr;
    req.resolution = interval;
    const auto checked = validate_time_range(req, Variable::WaterLevel, coverage_);
    const auto& prod = config_.coops.products.at(interval);
    const auto flags_it = config_.coops.bad_flag_positions.find(prod.product);
    const std::vector<int> bad_flags = flags_it == config_.coops.bad_flag_positions.end() ? std::vector<int>{} : flags_it->second;
    const bool closed = closed_before(checked.range.end, transport_->now());

    Merged merged;
    CoopsParseStats total;
    std::string station_name;
    std::size_t chunks = 0, empty_chunks = 0;
    const Unit wire_unit = coops_unit(config_.coops.units);
    for (const auto& [s, e] : split_window(checked.range.start, checked.range.end, prod.max_days)) {
        HttpRequest hr{config_.coops.base_url,
                       {{"station", station_id},
                        {"product", prod.product},
                        {"begin_date", coops_time(s)},
                        {"end_date", coops_time(e)},
                        {"datum", datum},
                        {"units", config_.coops.units},
                        {"time_zone", config_.coops.time_zone},
                        {"format", "json"},
                        {"application", config_.coops.application}},
                       "",
                       closed};
        auto rec = transport_->get(hr);
        ++chunks;
        merged.retrieved = std::max(merged.retrieved, rec.fetched_at);
        check_status(rec);
        CoopsParseStats st;
        try {
            auto part = parse_coops_json(rec.bytes, bad_flags, datum, &st, &station_name);
            merged.add(part);
        } catch (const Error& err) {
            if (err.code() != ErrorCode::GapOnly) throw;
            ++empty_chunks;
        }
        total.flagged += st.flagged;
        total.empty += st.empty;
        total.preliminary += st.preliminary;
        total.verified += st.verified;
    }
    auto series = merged.build(Variable::WaterLevel, wire_unit, datum, checked.range);
    if (series.valid_count() == 0)
        throw Error(ErrorCode::GapOnly, fmt::format("no valid {} values for station {} in the requested window", prod.product, station_id),
                    {{"station", station_id}, {"points", series.size()}, {"masked", series.size()}});

    Provenance p;
    p.source_name = config_.coops.source_name;
    p.dataset_id = prod.dataset_id;
    p.station_or_grid = station_name.empty() ? "station " + station_id : fmt::format("station {} ({})", station_id, station_name);
    p.unit = std::string(unit_code(Unit::Meters));
    p.datum = datum;
    p.time_span = checked.range;
    p.retrieved_at = merged.retrieved;
    if (checked.clamp_note) p.processing_steps.push_back(*checked.clamp_note);
    p.processing_steps.push_back(fmt::format("CO-OPS datagetter product {} (datum {}, units {}, time zone {})", prod.product,
                                             datum, config_.coops.units, config_.coops.time_zone));
    p.processing_steps.push_back(chunk_note(prod.product, chunks, prod.max_days));
    if (empty_chunks) p.processing_steps.push_back(fmt::format("{} request(s) returned no data", empty_chunks));
    p.processing_steps.push_back(fmt::format("masked {} flagged and {} missing points of {}", total.flagged,
                                             series.size() - series.valid_count() - total.flagged, series.size()));
    if (total.preliminary + total.verified > 0)
        p.processing_steps.push_back(fmt::format("quality: {} verified, {} preliminary points", total.verified, total.preliminary));
    else
        p.processing_steps.push_back(fmt::format("quality: {} is a verified-only product", prod.product));
    if (wire_unit != Unit::Meters) {
        series = convert_series(series, Unit::Meters);
        p.processing_steps.push_back("converted feet to meters at the client boundary");
    }
    return {std::move(series), std::move(p)};
}

Fetched<Series> NoaaClients::fetch_monthly_mean(const std::string& station_id, const TimeRange& tr,
                                                const std::string& datum) const {
    if (station_id.empty() || !std::all_of(station_id.begin(), station_id.end(), ::isdigit))
        throw Error(ErrorCode::StationUnknown, "station ids are numeric: '" + station_id + "'", {{"station", station_id}});
    const auto checked = validate_time_range(tr, Variable::MonthlyMeanSeaLevel, coverage_);
    const auto& prod = config_.coops.products.at(Resolution::Monthly);
    const bool closed = closed_before(checked.range.end, transport_->now());
    auto first = to_civil(checked.range.start);
    const auto window_start = make_timestamp(first.year, first.month, 1);

    Merged merged;
    std::size_t chunks = 0;
    const Unit wire_unit = coops_unit(config_.coops.units);
    for (const auto& [s, e] : split_window(window_start, checked.range.end, prod.max_days)) {
        auto c0 = to_civil(s), c1 = to_civil(e);
        HttpRequest hr{config_.coops.base_url,
                       {{"station", station_id},
                        {"product", prod.product},
                        {"begin_date", fmt::format("{:04d}{:02d}{:02d}", c0.year, c0.month, c0.day)},
                        {"end_date", fmt::format("{:04d}{:02d}{:02d}", c1.year, c1.month, c1.day)},
                        {"datum", datum},
                        {"units", config_.coops.units},
                        {"time_zone", config_.coops.time_zone},
                        {"format", "csv"},
                        {"application", config_.coops.application}},
                       "",
                       closed};
        auto rec = transport_->get(hr);
        ++chunks;
        merged.retrieved = std::max(merged.retrieved, rec.fetched_at);
        check_status(rec);
        merged.add(parse_coops_monthly_csv(rec.bytes, config_.coops.monthly_value_column, datum));
    }
    auto series = merged.build(Variable::MonthlyMeanSeaLevel, wire_unit, datum, {window_start, checked.range.end, Resolution::Monthly});
    if (series.valid_count() == 0)
        throw Error(ErrorCode::GapOnly, "no monthly means for station " + station_id + " in the requested window",
                    {{"station", station_id}, {"points", series.size()}});

    Provenance p;
    p.source_name = config_.coops.source_name;
    p.dataset_id = prod.dataset_id;
    p.station_or_grid = "station " + station_id;
    p.unit = std::string(unit_code(Unit::Meters));
    p.datum = datum;
    p.time_span = checked.range;
    p.retrieved_at = merged.retrieved;
    if (checked.clamp_note) p.processing_steps.push_back(*checked.clamp_note);
    p.processing_steps.push_back(fmt::format("CO-OPS datagetter product {} as CSV, column {} (datum {}, units {})", prod.product,
                                             config_.coops.monthly_value_column, datum, config_.coops.units));
    p.processing_steps.push_back(chunk_note(prod.product, chunks, prod.max_days));
    p.processing_steps.push_back(
        fmt::format("one point per calendar month stamped at the month start; {} of {} months missing", series.size() - series.valid_count(),
                    series.size()));
    if (wire_unit != Unit::Meters) {
        series = convert_series(series, Unit::Meters);
        p.processing_steps.push_back("converted feet to meters at the client boundary");
    }
    return {std::move(series), std::move(p)};
}

namespace {

struct CoraChunk {
    std::vector<double> lats, lons;
    std::vector<long long> ids;
    std::vector<Timestamp> times;
    netcdf::MaskedArray zeta;  // (time, node)
};

CoraChunk read_cora(const std::string& bytes, const std::string& variable) {
    auto file = netcdf::File::parse(bytes);
    CoraChunk c;
    c.lats = file.read_raw(file.variable("lat"));
    c.lons = file.read_raw(file.variable("lon"));
    const auto& tv = file.variable("time");
    const auto* units = tv.attribute("units");
    if (!units || units->type != netcdf::Type::Char) throw Error(ErrorCode::FormatError, "CORA time has no units", {{"variable", "time"}});
    c.times = decode_cf_times(file.read_raw(tv), units->text);
    c.zeta = netcdf::read_masked(file, variable);
    if (c.lats.size() != c.lons.size()) throw Error(ErrorCode::FormatError, "CORA lat/lon length mismatch", {{"variable", "lat"}});
    if (c.zeta.shape.size() != 2 || c.zeta.shape[0] != c.times.size() || c.zeta.shape[1] != c.lats.size())
        throw Error(ErrorCode::FormatError, "CORA " + variable + " must be (time, node)", {{"variable", variable}});
    if (const auto* node = file.find_variable("node")) {
        for (double v : file.read_raw(*node)) c.ids.push_back(static_cast<long long>(v));
        if (c.ids.size() != c.lats.size()) throw Error(ErrorCode::FormatError, "CORA node ids length mismatch", {{"variable", "node"}});
    } else {
        for (std::size_t i = 0; i < c.lats.size(); ++i) c.ids.push_back(static_cast<long long>(i));
    }
    return c;
}

}  // namespace

CoraFetch NoaaClients::fetch_cora_series(GeoPoint p, const TimeRange& tr) const {
    if (!(p.lat >= -90 && p.lat <= 90 && p.lon >= -180 && p.lon <= 180))
        throw Error(ErrorCode::InvalidValue, "point outside lat/lon bounds", {{"field", "location"}});
    TimeRange req = tr;
    req.resolution = Resolution::Hourly;
    const auto checked = validate_time_range(req, Variable::CoraZeta, coverage_);
    const double radius = config_.cora.search_radius_km;
    const double dlat = radius / 111.195;
    const double dlon = std::min(180.0, dlat / std::max(0.01, std::cos(p.lat * M_PI / 180.0)));
    const auto box = fmt::format("north={:.4f} south={:.4f} east={:.4f} west={:.4f}", p.lat + dlat, p.lat - dlat, p.lon + dlon, p.lon - dlon);

    std::vector<CoraChunk> chunks;
    Timestamp retrieved{};
    for (const auto& [s, e] : split_window(checked.range.start, checked.range.end, config_.cora.max_days)) {
        HttpRequest hr{config_.cora.base_url,
                       {{"var", config_.cora.variable},
                        {"north", fmt::format("{:.4f}", std::min(90.0, p.lat + dlat))},
                        {"south", fmt::format("{:.4f}", std::max(-90.0, p.lat - dlat))},
                        {"east", fmt::format("{:.4f}", p.lon + dlon)},
                        {"west", fmt::format("{:.4f}", p.lon - dlon)},
                        {"time_start", format_iso(s)},
                        {"time_end", format_iso(e)},
                        {"accept", "netcdf3"}},
                       "",
                       true};
        auto rec = transport_->get(hr);
        retrieved = std::max(retrieved, rec.fetched_at);
        check_status(rec);
        chunks.push_back(read_cora(rec.bytes, config_.cora.variable));
        if (chunks.back().lats != chunks.front().lats || chunks.back().lons != chunks.front().lons)
            throw Error(ErrorCode::FormatError, "CORA node sets differ between requests", {{"variable", "lat"}});
    }
    const auto& first = chunks.front();
    const std::size_t nn = first.lats.size();
    std::vector<Node> nodes(nn);
    for (std::size_t k = 0; k < nn; ++k) {
        bool wet = false;
        for (const auto& c : chunks)
            for (std::size_t t = 0; t < c.times.size() && !wet; ++t) wet = c.zeta.valid[t * nn + k] != 0;
        const bool inside = haversine_km(p, {first.lats[k], first.lons[k]}) <= radius;
        nodes[k] = {first.lats[k], first.lons[k], wet && inside};
    }
    NearestNode nearest;
    try {
        nearest = nearest_node(p, nodes);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NoValidNode) throw;
        throw Error(ErrorCode::NoValidNode,
                    fmt::format("no wet CORA node within {:.0f} km of ({:.4f}, {:.4f})", radius, p.lat, p.lon),
                    {{"radius_km", radius}, {"candidates", nn}, {"lat", p.lat}, {"lon", p.lon}});
    }
    const auto k = nearest.index;

    std::map<Timestamp, std::pair<double, bool>> points;
    for (const auto& c : chunks)
        for (std::size_t t = 0; t < c.times.size(); ++t)
            points.try_emplace(c.times[t], c.zeta.values[t * nn + k], c.zeta.valid[t * nn + k] != 0);
    std::vector<Timestamp> ts;
    std::vector<double> vals;
    std::vector<std::uint8_t> valid;
    for (const auto& [t, v] : points) {
        if (t < checked.range.start || t > checked.range.end) continue;
        ts.push_back(t);
        vals.push_back(v.first);
        valid.push_back(v.second ? 1 : 0);
    }
    Series series(Variable::CoraZeta, Unit::Meters, std::nullopt, std::move(ts), std::move(vals), std::move(valid));
    if (series.valid_count() == 0)
        throw Error(ErrorCode::GapOnly, "chosen CORA node has no values in the window", {{"node", first.ids[k]}});

    CoraFetch out{std::move(series), {first.lats[k], first.lons[k]}, first.ids[k], nearest.distance_km, {}};
    auto& prov = out.provenance;
    prov.source_name = config_.cora.source_name;
    prov.dataset_id = config_.cora.dataset_id;
    prov.station_or_grid = fmt::format("node {} at ({:.4f}, {:.4f}), {:.2f} km from ({:.4f}, {:.4f})", out.node_id, out.node.lat,
                                       out.node.lon, out.distance_km, p.lat, p.lon);
    prov.unit = std::string(unit_code(Unit::Meters));
    prov.time_span = checked.range;
    prov.retrieved_at = retrieved;
    if (checked.clamp_note) prov.processing_steps.push_back(*checked.clamp_note);
    prov.processing_steps.push_back(fmt::format("subset {} over {} as NetCDF-3 in {} request(s); archive never fetched whole",
                                                config_.cora.variable, box, chunks.size()));
    prov.processing_steps.push_back(fmt::format("nearest wet node by haversine (R = 6371 km) among {} candidates within {:.0f} km",
                                                nn, radius));
    prov.processing_steps.push_back(fmt::format("{} of {} hourly values masked (_FillValue)", out.series.size() - out.series.valid_count(),
                                                out.series.size()));
    return out;
}

Fetched<GridSlice> NoaaClients::fetch_sst(const BBox& box, Timestamp date, const std::string& label) const {
    box.validate();
    const auto day = start_of_day(date);
    const auto checked = validate_time_range({day, end_of_day(day), Resolution::Daily}, Variable::SeaSurfaceTemperature, coverage_);
    auto tod = parse_timestamp(format_date(day) + "T" + config_.crw.time_of_day + "Z");
    if (!tod) config_error("crw.time_of_day", "bad time_of_day " + config_.crw.time_of_day);
    const auto query = fmt::format("{}[({})][({:.4f}):({:.4f})][({:.4f}):({:.4f})]", config_.crw.variable,
                                   format_iso(*tod), box.lat_max, box.lat_min, box.lon_min, box.lon_max);
    HttpRequest hr{config_.crw.base_url, {}, query, closed_before(checked.range.end, transport_->now())};
    auto rec = transport_->get(hr);
    if (rec.status == 404 && to_lower(rec.bytes).find("no matching results") != std::string::npos)
        throw Error(ErrorCode::GapOnly, "provider has no SST for " + format_date(day), {{"date", format_date(day)}});
    check_status(rec);

    auto file = netcdf::File::parse(rec.bytes);
    auto lats = file.read_raw(file.variable("latitude"));
    auto lons = file.read_raw(file.variable("longitude"));
    const auto& tv = file.variable("time");
    const auto* tunits = tv.attribute("units");
    if (!tunits) throw Error(ErrorCode::FormatError, "CRW time has no units", {{"variable", "time"}});
    auto times = decode_cf_times(file.read_raw(tv), tunits->text);
    auto sst = netcdf::read_masked(file, config_.crw.variable);
    if (times.empty() || sst.shape.size() != 3 || sst.shape[1] != lats.size() || sst.shape[2] != lons.size())
        throw Error(ErrorCode::FormatError, config_.crw.variable + " must be (time, latitude, longitude)",
                    {{"variable", config_.crw.variable}});
    Unit unit = Unit::Celsius;
    if (const auto* u = file.variable(config_.crw.variable).attribute("units")) {
        auto parsed = unit_from_code(u->text);
        if (!parsed || !convertible(*parsed, Unit::Celsius))
            throw Error(ErrorCode::FormatError, "unexpected SST unit " + u->text, {{"variable", config_.crw.variable}});
        unit = *parsed;
    }

    const bool lat_desc = lats.size() > 1 && lats.front() > lats.back();
    const bool lon_desc = lons.size() > 1 && lons.front() > lons.back();
    std::vector<std::size_t> rows, cols;
    for (std::size_t r = 0; r < lats.size(); ++r)
        if (lats[r] >= box.lat_min && lats[r] <= box.lat_max) rows.push_back(r);
    for (std::size_t c = 0; c < lons.size(); ++c)
        if (lons[c] >= box.lon_min && lons[c] <= box.lon_max) cols.push_back(c);
    if (lat_desc) std::reverse(rows.begin(), rows.end());
    if (lon_desc) std::reverse(cols.begin(), cols.end());
    std::vector<double> out_lats, out_lons, values;
    std::vector<std::uint8_t> valid;
    for (auto r : rows) out_lats.push_back(lats[r]);
    for (auto c : cols) out_lons.push_back(lons[c]);
    std::size_t fill = 0;
    for (auto r : rows)
        for (auto c : cols) {
            const auto idx = r * lons.size() + c;
            double v = sst.values[idx];
            bool ok = sst.valid[idx] != 0;
            if (ok && unit != Unit::Celsius) v = convert_value(v, unit, Unit::Celsius);
            fill += ok ? 0 : 1;
            values.push_back(v);
            valid.push_back(ok ? 1 : 0);
        }
    std::optional<GridSlice> grid;
    try {
        grid.emplace(Variable::SeaSurfaceTemperature, Unit::Celsius, times.front(), std::move(out_lats), std::move(out_lons),
                     std::move(values), std::move(valid));
    } catch (const Error& e) {
        throw Error(ErrorCode::FormatError, std::string("CRW grid is malformed: ") + e.what(), e.details());
    }

    Provenance p;
    p.source_name = config_.crw.source_name;
    p.dataset_id = config_.crw.dataset_id;
    p.station_or_grid = fmt::format("{} grid, lat {:.2f}..{:.2f}, lon {:.2f}..{:.2f} ({} x {} cells)", label, box.lat_min,
                                    box.lat_max, box.lon_min, box.lon_max, grid->rows(), grid->cols());
    p.unit = std::string(unit_code(Unit::Celsius));
    p.time_span = checked.range;
    p.retrieved_at = rec.fetched_at;
    p.processing_steps.push_back(fmt::format("subset {} for {} from ERDDAP griddap as NetCDF-3", config_.crw.variable, format_iso(*tod)));
    const auto* scale = file.variable(config_.crw.variable).attribute("scale_factor");
    p.processing_steps.push_back(fmt::format("unpacked with scale_factor {}; masked {} fill cells of {}",
                                             scale && !scale->numbers.empty() ? scale->numbers.front() : 1.0, fill,
                                             grid->cell_count()));
    if (lat_desc) p.processing_steps.push_back("latitude reordered ascending");
    if (unit != Unit::Celsius) p.processing_steps.push_back("converted Fahrenheit to Celsius at the client boundary");
    return {std::move(*grid), std::move(p)};
}

}  // namespace oceanqa
