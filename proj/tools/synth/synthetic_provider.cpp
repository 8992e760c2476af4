// SPDX-License-Identifier: Apache-2.0
#include "synthetic_provider.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <regex>
#include <vector>

#include <fmt/format.h>

#include "oceanqa/analysis.hpp"
#include "oceanqa/netcdf.hpp"

namespace oceanqa::synth {

namespace {

constexpr double kTwoPi = 6.283185307179586;

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t hash_str(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
    return h;
}

/// Uniform in [0, 1).
double unit_hash(std::uint64_t a, std::uint64_t b, std::uint64_t salt) {
    return static_cast<double>(splitmix(splitmix(a ^ splitmix(b)) ^ salt) >> 11) * 0x1.0p-53;
}

struct StationModel {
    std::string id;
    std::string name;
    double lat, lon;
    std::array<double, 5> amp;    // M2 S2 N2 K1 O1
    std::array<double, 5> phase;  // radians
    double trend_m_per_yr;
    int first_year;
};

constexpr std::array<double, 5> kPeriodHours = {12.4206012, 12.0, 12.65834751, 23.93447213, 25.81933871};

const std::vector<StationModel>& stations() {
    static const std::vector<StationModel> s = {
        {"8443970", "Boston", 42.3548, -71.0534, {1.37, 0.22, 0.31, 0.14, 0.11}, {1.9, 2.6, 1.5, 3.4, 3.0}, 0.0029, 1921},
        {"8723214", "Virginia Key", 25.7314, -80.1618, {0.30, 0.05, 0.07, 0.04, 0.03}, {0.4, 1.1, 0.2, 2.9, 2.5}, 0.0041, 1994},
        {"8518750", "The Battery", 40.7006, -74.0142, {0.66, 0.13, 0.15, 0.10, 0.05}, {0.9, 1.6, 0.6, 3.1, 2.7}, 0.0031, 1920},
        {"8724580", "Key West", 24.5508, -81.8081, {0.19, 0.05, 0.04, 0.11, 0.10}, {1.4, 2.0, 1.1, 0.7, 0.4}, 0.0026, 1913},
        {"9414290", "San Francisco", 37.8063, -122.4659, {0.58, 0.13, 0.12, 0.37, 0.23}, {2.8, 3.2, 2.5, 1.9, 1.7}, 0.0020, 1897},
        {"9447130", "Seattle", 47.6026, -122.3393, {1.07, 0.26, 0.21, 0.83, 0.45}, {2.3, 2.9, 2.0, 1.4, 1.2}, 0.0021, 1899},
        {"8638610", "Sewells Point", 36.9467, -76.3300, {0.37, 0.07, 0.08, 0.05, 0.04}, {0.2, 0.8, 0.0, 2.6, 2.3}, 0.0047, 1927},
        {"8665530", "Charleston", 32.7808, -79.9236, {0.76, 0.12, 0.17, 0.10, 0.07}, {0.5, 1.2, 0.3, 2.7, 2.4}, 0.0034, 1921},
    };
    return s;
}

const StationModel* find_station(std::string_view id) {
    for (const auto& s : stations())
        if (s.id == id) return &s;
    return nullptr;
}

const Timestamp kDataEnd = make_timestamp(2025, 1, 14, 23, 59);
const Timestamp kRefEpoch = make_timestamp(2000, 1, 1);

double hours_since_ref(Timestamp t) { return std::chrono::duration<double>(t - kRefEpoch).count() / 3600.0; }

double base_level(const StationModel& s, Timestamp t, double scale = 1.0) {
    const double h = hours_since_ref(t);
    double v = 0.0;
    for (std::size_t k = 0; k < 5; ++k) v += scale * s.amp[k] * std::cos(kTwoPi * h / kPeriodHours[k] - s.phase[k]);
    const auto c = to_civil(t);
    const double doy = std::chrono::duration<double>(t - make_timestamp(c.year, 1, 1)).count() / 86400.0;
    v += 0.07 * std::cos(kTwoPi * (doy - 260.0) / 365.25);
    v += s.trend_m_per_yr * (h / 8765.82 + 2000.0 - 1992.0);
    v += 0.08 * (unit_hash(hash_str(s.id), static_cast<std::uint64_t>(t.time_since_epoch().count()), 1) - 0.5);
    return v;
}

/// Hour on 2024-01-13 where the Boston tide peaks; the planted surge is centred there.
Timestamp boston_surge_time() {
    static const Timestamp tc = [] {
        const auto& s = *find_station("8443970");
        Timestamp best = make_timestamp(2024, 1, 13);
        for (int h = 0; h < 24; ++h) {
            auto t = make_timestamp(2024, 1, 13, h);
            if (base_level(s, t) > base_level(s, best)) best = t;
        }
        return best;
    }();
    return tc;
}

double datum_height(const StationModel& s, std::string_view datum) {
    const double a = s.amp[0] + s.amp[1];
    if (datum == "MSL" || datum == "MTL") return 0.0;
    if (datum == "MHHW") return 1.05 * a;
    if (datum == "MHW") return 0.95 * a;
    if (datum == "MLW") return -0.95 * a;
    if (datum == "MLLW") return -1.05 * a;
    if (datum == "NAVD") return -0.10;
    if (datum == "STND") return -2.50;
    return std::nan("");
}

std::optional<Timestamp> parse_coops_date(const std::string& s) {
    if (s.size() < 8) return std::nullopt;
    auto iso = s.substr(0, 4) + "-" + s.substr(4, 2) + "-" + s.substr(6, 2);
    if (s.size() > 8) iso += "T" + s.substr(9);
    return parse_timestamp(iso);
}

std::string percent_decode(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%' && i + 2 < s.size()) {
            out += static_cast<char>(std::stoi(std::string(s.substr(i + 1, 2)), nullptr, 16));
            i += 2;
        } else {
            out += s[i] == '+' ? ' ' : s[i];
        }
    }
    return out;
}

HttpResponse json_error(const std::string& message) {
    return {200, fmt::format(R"({{"error": {{"message":"{}"}}}})", message), "application/json;charset=UTF-8"};
}

bool cora_land(double lat, double lon) {
    const bool interior = lat > 30.5 && lon > -125.0 && lon < -75.0;
    const bool new_england = lat > 40.5 && lat < 45.5 && lon >= -75.0 && lon < -70.98 - 0.25 * (lat - 42.35);
    return interior || new_england;
}

bool cora_tidal_flat(double lat, double lon) {
    return !cora_land(lat, lon) && cora_land(lat, lon - 0.05);
}

bool gulf_land(double lat, double lon) {
    if (lat > 30.3) return true;
    if (lat > 29.0 && lon > -90.5 && lon < -88.9) return true;
    if (lat > 25.2 && lon > -82.7 + (27.5 - lat) * 0.45) return true;
    if (lon < -97.3) return true;
    if (lat < 18.6 && lon < -90.5) return true;
    if (lat < 21.4 && lon > -90.4 && lon < -86.8) return true;
    if (lat > 21.8 && lat < 23.2 && lon > -85.0) return true;
    return false;
}

double sst_raw(double lat, double lon, Timestamp day) {
    const auto c = to_civil(day);
    const double doy = std::chrono::duration<double>(day - make_timestamp(c.year, 1, 1)).count() / 86400.0;
    const double season = std::cos(kTwoPi * (doy - 230.0) / 365.25);
    double t = 26.5 + 2.5 * season - (0.55 - 0.25 * season) * (lat - 22.0);
    t += 2.0 * std::exp(-((lon + 86.5) * (lon + 86.5) / 1.5 + (lat - 25.0) * (lat - 25.0) / 4.0));
    t -= 4.0 * (1.0 - season) * 0.5 * std::exp(-(30.3 - lat) / 0.8);
    t += 0.3 * (unit_hash(static_cast<std::uint64_t>(std::llround(lat * 1000)), static_cast<std::uint64_t>(std::llround(lon * 1000)),
                          static_cast<std::uint64_t>(day.time_since_epoch().count())) - 0.5);
    return t;
}

const Timestamp kPlantedSstDay = make_timestamp(2019, 12, 31);

double cell_center(long k) { return -89.975 + 0.05 * static_cast<double>(k); }
double lon_center(long k) { return -179.975 + 0.05 * static_cast<double>(k); }

/// Extremes of the raw model over the Gulf water cells on the planted day.
std::pair<double, double> gulf_raw_range() {
    static const std::pair<double, double> r = [] {
        double lo = 1e9, hi = -1e9;
        for (long i = 0; i < 3600; ++i) {
            const double lat = cell_center(i);
            if (lat < 18.0 || lat > 31.0) continue;
            for (long j = 0; j < 7200; ++j) {
                const double lon = lon_center(j);
                if (lon < -98.0 || lon > -80.0 || gulf_land(lat, lon)) continue;
                const double v = sst_raw(lat, lon, kPlantedSstDay);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
        return std::make_pair(lo, hi);
    }();
    return r;
}

}  // namespace

double model_level(const std::string& station_id, Timestamp t) {
    const auto* s = find_station(station_id);
    if (!s) return std::nan("");
    double v = base_level(*s, t);
    if (station_id == "8443970") {
        const auto tc = boston_surge_time();
        const double dh = std::chrono::duration<double>(t - tc).count() / 3600.0;
        if (std::abs(dh) < 48.0) {
            const double lift = (SyntheticProvider::kBostonPeak - base_level(*s, tc)) * std::exp(-(dh / 6.0) * (dh / 6.0));
            v = t == tc ? SyntheticProvider::kBostonPeak : std::min(v + lift, SyntheticProvider::kBostonPeak - 0.004);
        }
    }
    return v;
}

HttpResponse SyntheticProvider::operator()(const std::string& url, std::chrono::seconds) const {
    const auto qpos = url.find('?');
    const auto base = url.substr(0, qpos);
    const auto query = qpos == std::string::npos ? std::string() : url.substr(qpos + 1);
    if (base.find("griddap") != std::string::npos) return crw(percent_decode(query));
    std::map<std::string, std::string> q;
    std::size_t start = 0;
    while (start < query.size()) {
        auto amp = query.find('&', start);
        auto part = query.substr(start, amp == std::string::npos ? std::string::npos : amp - start);
        auto eq = part.find('=');
        q[percent_decode(part.substr(0, eq))] = eq == std::string::npos ? "" : percent_decode(part.substr(eq + 1));
        if (amp == std::string::npos) break;
        start = amp + 1;
    }
    if (base.find("datagetter") != std::string::npos) return coops(q);
    if (base.find("ncss") != std::string::npos) return cora(q);
    return {404, "Not Found", "text/plain"};
}

HttpResponse SyntheticProvider::coops(const std::map<std::string, std::string>& q) const {
    auto get = [&](const std::string& k) {
        auto it = q.find(k);
        return it == q.end() ? std::string() : it->second;
    };
    const auto product = get("product");
    const bool csv = get("format") == "csv";
    const auto* st = find_station(get("station"));
    if (!st) {
        const std::string msg = "Wrong Station ID: Check that you have the correct station id.";
        return csv ? HttpResponse{200, "Error: " + msg + "\n", "text/csv"} : json_error(msg);
    }
    const auto datum = get("datum");
    const double dh = datum_height(*st, datum);
    if (std::isnan(dh)) return json_error("The supported Datum values are: MHHW, MHW, MTL, MSL, MLW, MLLW, NAVD, STND");
    auto b = parse_coops_date(get("begin_date"));
    auto e = parse_coops_date(get("end_date"));
    if (!b || !e || *e < *b) return json_error("Invalid begin or end date");
    const auto span_days = std::chrono::duration<double>(*e - *b).count() / 86400.0;
    const int limit = product == "water_level" ? limits_.six_minute_days
                      : product == "hourly_height" ? limits_.hourly_days
                                                   : limits_.monthly_days;
    if (span_days > limit) return json_error(fmt::format("The range of dates requested exceeds {} days for this product", limit));
    const auto data_start = make_timestamp(st->first_year, 1, 1);
    const auto from = std::max(*b, data_start);
    const auto to = std::min(*e, kDataEnd);
    const std::string no_data = "No data was found. This product may not be offered at this station at the requested time.";
    if (to < from) return csv ? HttpResponse{200, "Error: " + no_data + "\n", "text/csv"} : json_error(no_data);

    const auto stid = hash_str(st->id);
    if (product == "monthly_mean") {
        std::string body = " Year, Month, Highest, MHHW, MHW, MSL, MTL, MLW, MLLW, DTL, GT, MN, DHQ, DLQ, HWI, LWI, Lowest, Inferred\n";
        auto c = to_civil(from);
        for (int y = c.year, m = static_cast<int>(c.month);; ++m) {
            if (m > 12) {
                m = 1;
                ++y;
            }
            const auto month_start = make_timestamp(y, static_cast<unsigned>(m), 1);
            if (month_start > to) break;
            double sum = 0, hi = -1e9, lo = 1e9;
            int n = 0;
            const auto days = days_in_month(y, static_cast<unsigned>(m));
            for (unsigned d = 1; d <= days; ++d)
                for (int h = 0; h < 24; ++h) {
                    const double v = model_level(st->id, make_timestamp(y, static_cast<unsigned>(m), d, h));
                    sum += v;
                    hi = std::max(hi, v);
                    lo = std::min(lo, v);
                    ++n;
                }
            const double msl = sum / n - dh;
            const double a = st->amp[0] + st->amp[1];
            if (unit_hash(stid, static_cast<std::uint64_t>(month_start.time_since_epoch().count()), 7) < 0.01) {
                body += fmt::format("{}, {}, , , , , , , , , , , , , , , , 0\n", y, m);
                continue;
            }
            body += fmt::format("{}, {}, {:.3f}, {:.3f}, {:.3f}, {:.3f}, {:.3f}, {:.3f}, {:.3f}, {:.3f}, {:.3f}, {:.3f}, {:.3f}, {:.3f}, "
                                "{:.2f}, {:.2f}, {:.3f}, 0\n",
                                y, m, hi - dh, msl + 1.05 * a, msl + 0.95 * a, msl, msl + 0.004, msl - 0.95 * a, msl - 1.05 * a,
                                msl, 2.1 * a, 1.9 * a, 0.1 * a, 0.1 * a, 3.4, 9.6, lo - dh);
        }
        return {200, body, "text/csv"};
    }

    const bool six = product == "water_level";
    if (!six && product != "hourly_height") return json_error("Invalid product: " + product);
    const auto step = six ? std::chrono::minutes{6} : std::chrono::minutes{60};
    std::string body = fmt::format(R"({{"metadata":{{"id":"{}","name":"{}","lat":"{:.4f}","lon":"{:.4f}"}}, "data":[)", st->id, st->name,
                                   st->lat, st->lon);
    // first sample on the step grid at or after `from`
    auto t = from;
    const auto rem = t.time_since_epoch() % step;
    if (rem.count() != 0) t += step - rem;
    const auto tc = boston_surge_time();
    const auto prelim_from = make_timestamp(2024, 11, 1);
    bool first = true;
    for (; t <= to; t += step) {
        const auto key = static_cast<std::uint64_t>(t.time_since_epoch().count());
        const double u = unit_hash(stid, key, 3);
        const bool planted = st->id == "8443970" && t == tc;
        const bool flagged = !planted && u < 0.003;
        const bool empty = !planted && !flagged && u < 0.005;
        const double v = model_level(st->id, t) - dh + (flagged ? 7.5 : 0.0);
        const auto c = to_civil(t);
        const std::string value = empty ? "" : fmt::format("{:.3f}", v);
        const std::string flags = six ? (flagged ? "0,1,1,0" : "0,0,0,0") : (flagged ? "1,0" : "0,0");
        body += fmt::format(R"({}{{"t":"{:04d}-{:02d}-{:02d} {:02d}:{:02d}", "v":"{}", "s":"{:.3f}", "f":"{}")", first ? "" : ", ",
                            c.year, c.month, c.day, c.hour, c.minute, value, 0.002 + 0.02 * unit_hash(stid, key, 5), flags);
        if (six) body += fmt::format(R"(, "q":"{}")", t >= prelim_from ? "p" : "v");
        body += "}";
        first = false;
    }
    if (first) return json_error(no_data);
    body += "]}";
    return {200, body, "application/json;charset=UTF-8"};
}

HttpResponse SyntheticProvider::cora(const std::map<std::string, std::string>& q) const {
    auto num = [&](const std::string& k) {
        auto it = q.find(k);
        return it == q.end() ? std::nan("") : std::stod(it->second);
    };
    const double north = num("north"), south = num("south"), east = num("east"), west = num("west");
    auto ts = q.count("time_start") ? parse_timestamp(q.at("time_start")) : std::nullopt;
    auto te = q.count("time_end") ? parse_timestamp(q.at("time_end")) : std::nullopt;
    if (std::isnan(north + south + east + west) || !ts || !te || *te < *ts || q.count("var") == 0 || q.at("var") != "zeta")
        return {400, "Bad request: need var=zeta, north, south, east, west, time_start, time_end", "text/plain"};
    if (*ts < make_timestamp(1979, 1, 1) || *te > make_timestamp(2022, 12, 31, 23, 59))
        return {400, "requested time is outside the dataset's range", "text/plain"};

    std::vector<double> lats, lons, ids;
    std::vector<GeoPoint> pts;
    for (long i = static_cast<long>(std::ceil(south * 10)); i <= static_cast<long>(std::floor(north * 10)); ++i)
        for (long j = static_cast<long>(std::ceil(west * 10)); j <= static_cast<long>(std::floor(east * 10)); ++j) {
            const auto id = static_cast<std::uint64_t>((i + 900) * 10000 + (j + 1800));
            if (unit_hash(id, 0, 11) < 0.25) continue;  // irregular mesh
            const double lat = i / 10.0 + 0.04 * (unit_hash(id, 1, 12) - 0.5);
            const double lon = j / 10.0 + 0.04 * (unit_hash(id, 2, 13) - 0.5);
            if (lat < south || lat > north || lon < west || lon > east) continue;
            lats.push_back(lat);
            lons.push_back(lon);
            ids.push_back(static_cast<double>(id));
            pts.push_back({lat, lon});
        }
    std::vector<double> times, zeta;
    auto t = *ts;
    if (auto rem = t.time_since_epoch() % std::chrono::hours{1}; rem.count()) t += std::chrono::hours{1} - rem;
    for (; t <= *te; t += std::chrono::hours{1}) {
        times.push_back(static_cast<double>(t.time_since_epoch().count()));
        for (std::size_t k = 0; k < pts.size(); ++k) {
            const StationModel* near = &stations().front();
            double best = 1e18;
            for (const auto& s : stations()) {
                const double d = haversine_km(pts[k], {s.lat, s.lon});
                if (d < best) {
                    best = d;
                    near = &s;
                }
            }
            double v = base_level(*near, t, std::max(0.5, 0.97 - 0.002 * best));
            const bool dry = cora_land(pts[k].lat, pts[k].lon) || (cora_tidal_flat(pts[k].lat, pts[k].lon) && v < 0.3);
            zeta.push_back(dry ? -99999.0 : static_cast<double>(static_cast<float>(v)));
        }
    }
    netcdf::Writer w(netcdf::Version::Classic);
    w.add_dimension("time", times.size()).add_dimension("node", pts.size());
    w.add_global_attribute(netcdf::Attribute::of_text("title", "CORA subset (synthetic)"));
    w.add_global_attribute(netcdf::Attribute::of_text("Conventions", "CF-1.6"));
    w.add_variable({"time", netcdf::Type::Double, {"time"}, {netcdf::Attribute::of_text("units", "seconds since 1970-01-01 00:00:00")}, times, {}});
    w.add_variable({"lat", netcdf::Type::Double, {"node"}, {netcdf::Attribute::of_text("units", "degrees_north")}, lats, {}});
    w.add_variable({"lon", netcdf::Type::Double, {"node"}, {netcdf::Attribute::of_text("units", "degrees_east")}, lons, {}});
    w.add_variable({"node", netcdf::Type::Int, {"node"}, {}, ids, {}});
    w.add_variable({"zeta",
                    netcdf::Type::Float,
                    {"time", "node"},
                    {netcdf::Attribute::of_text("units", "m"), netcdf::Attribute::of_text("standard_name", "sea_surface_height_above_geoid"),
                     netcdf::Attribute::of_numbers("_FillValue", netcdf::Type::Float, {-99999.0})},
                    zeta,
                    {}});
    return {200, w.serialize(), "application/x-netcdf"};
}

HttpResponse SyntheticProvider::crw(const std::string& raw) const {
    static const std::regex re(R"(^(\w+)\[\(([^)]+)\)\]\[\(([^)]+)\):\(([^)]+)\)\]\[\(([^)]+)\):\(([^)]+)\)\]$)");
    std::smatch m;
    if (!std::regex_match(raw, m, re) || m[1] != "CRW_SST")
        return {400, "Error {\n    code=400;\n    message=\"Bad Request: Query error: unrecognized griddap query.\";\n}\n", "text/plain"};
    auto when = parse_timestamp(m[2].str());
    const double lat_a = std::stod(m[3]), lat_b = std::stod(m[4]), lon_a = std::stod(m[5]), lon_b = std::stod(m[6]);
    if (!when || *when < make_timestamp(1985, 1, 1) || *when > kDataEnd)
        return {404,
                "Error {\n    code=404;\n    message=\"Not Found: Your query produced no matching results. (time is outside the "
                "dataset's range)\";\n}\n",
                "text/plain"};
    const auto day = start_of_day(*when);
    const double lat_lo = std::min(lat_a, lat_b), lat_hi = std::max(lat_a, lat_b);
    const double lon_lo = std::min(lon_a, lon_b), lon_hi = std::max(lon_a, lon_b);
    std::vector<double> lats, lons;
    for (long i = 3599; i >= 0; --i)
        if (cell_center(i) >= lat_lo && cell_center(i) <= lat_hi) lats.push_back(cell_center(i));
    for (long j = 0; j < 7200; ++j)
        if (lon_center(j) >= lon_lo && lon_center(j) <= lon_hi) lons.push_back(lon_center(j));
    const bool planted = day == kPlantedSstDay;
    const auto [rlo, rhi] = planted ? gulf_raw_range() : std::make_pair(0.0, 1.0);
    std::vector<double> packed;
    packed.reserve(lats.size() * lons.size());
    for (double lat : lats)
        for (double lon : lons) {
            if (gulf_land(lat, lon)) {
                packed.push_back(-32768);
                continue;
            }
            double v = sst_raw(lat, lon, day);
            if (planted) v = SyntheticProvider::kGulfSstMin + (v - rlo) * (SyntheticProvider::kGulfSstMax - SyntheticProvider::kGulfSstMin) / (rhi - rlo);
            packed.push_back(std::round(v * 100.0));
        }
    netcdf::Writer w(netcdf::Version::Classic);
    w.add_dimension("time", 1).add_dimension("latitude", lats.size()).add_dimension("longitude", lons.size());
    w.add_global_attribute(netcdf::Attribute::of_text("title", "NOAA Coral Reef Watch daily SST subset (synthetic)"));
    w.add_variable({"time", netcdf::Type::Double, {"time"}, {netcdf::Attribute::of_text("units", "seconds since 1970-01-01T00:00:00Z")},
                    {static_cast<double>(when->time_since_epoch().count())}, {}});
    w.add_variable({"latitude", netcdf::Type::Double, {"latitude"}, {netcdf::Attribute::of_text("units", "degrees_north")}, lats, {}});
    w.add_variable({"longitude", netcdf::Type::Double, {"longitude"}, {netcdf::Attribute::of_text("units", "degrees_east")}, lons, {}});
    w.add_variable({"CRW_SST",
                    netcdf::Type::Short,
                    {"time", "latitude", "longitude"},
                    {netcdf::Attribute::of_text("units", "degree_C"),
                     netcdf::Attribute::of_numbers("_FillValue", netcdf::Type::Short, {-32768}),
                     netcdf::Attribute::of_numbers("scale_factor", netcdf::Type::Float, {0.01}),
                     netcdf::Attribute::of_numbers("add_offset", netcdf::Type::Float, {0.0}),
                     netcdf::Attribute::of_numbers("valid_min", netcdf::Type::Short, {-200}),
                     netcdf::Attribute::of_numbers("valid_max", netcdf::Type::Short, {5000})},
                    packed,
                    {}});
    return {200, w.serialize(), "application/x-netcdf"};
}

}  // namespace oceanqa::synth
