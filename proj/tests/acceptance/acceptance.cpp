// SPDX-License-Identifier: Apache-2.0
// Acceptance run: one PASS/FAIL line per primary criterion, exit status 1 on
// any FAIL. Everything runs offline against the committed fixtures.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "oceanqa/analysis.hpp"
#include "oceanqa/service.hpp"
#include "oceanqa/text_util.hpp"
#include "support/fuzz.hpp"

namespace fs = std::filesystem;
using namespace oceanqa;
using nlohmann::json;

namespace {

// published targets and pinned tolerances
constexpr double kBostonMax2024 = 2.79;
constexpr double kBostonMaxTol = 0.01;
constexpr double kMaxSeconds = 5.0;
constexpr double kGulfSstMin = 13.04;
constexpr double kGulfSstMax = 28.34;
constexpr double kSstTol = 0.05;
constexpr double kColorbarTol = 0.005;  // labels carry two decimals
constexpr double kCoraRadiusKm = 50.0;
constexpr double kStatsRelTol = 1e-9;
constexpr double kTrendRelTol = 1e-9;
constexpr double kDistanceTolKm = 1e-6;
constexpr double kScoreTol = 1e-12;
constexpr int kStatsTrials = 1000;
constexpr int kTrendTrials = 500;
constexpr int kNodeTrials = 100;
constexpr int kStoreTrials = 20;
constexpr int kStoreChunks = 50;
constexpr int kThresholdTrials = 200;
constexpr int kBodyFuzzTrials = 300;
constexpr int kCallFuzzTrials = 600;

const std::string kBoston2024 = "What is the maximum water level in Boston in 2024?";
const std::string kSeaLevel2022 = "What is the sea level in Boston and Virginia Key in 2022?";
const std::string kWaterLevelMay2020 = "What was the water level in Boston in May 2020?";
const std::string kCoraJune1993 = "Show Boston's water level from CORA reanalysis in June 1993.";
const std::string kGulfSst2019 = "What was the SST in the Gulf of Mexico in 2019?";
const std::vector<std::string> kCaseQueries = {kSeaLevel2022, kWaterLevelMay2020, kCoraJune1993, kGulfSst2019};

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Check {
    std::vector<std::string> failures;
    void expect(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }
    Outcome done(const std::string& detail) const {
        if (failures.empty()) return {true, detail};
        return {false, fmt::format("{}", fmt::join(failures, "; "))};
    }
};

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / fmt::format("oceanqa_accept_{}_{}", tag, std::random_device{}());
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

EnvLookup no_env() {
    return [](const std::string&) -> std::optional<std::string> { return std::nullopt; };
}

HttpFetcher offline() {
    return [](const std::string& url, std::chrono::seconds) -> HttpResponse {
        throw Error(ErrorCode::ProviderUnavailable, "network disabled during acceptance: " + url, {{"retryable", false}});
    };
}

std::unique_ptr<App> replay_app(const fs::path& figures, std::shared_ptr<const ModelClient> model = nullptr) {
    auto cfg = load_service_config(fs::path(OCEANQA_SOURCE_DIR) / "config" / "service.json", no_env());
    cfg.transport_mode = TransportMode::Replay;
    cfg.fixture_dir = fs::path(OCEANQA_SOURCE_DIR) / "data" / "fixtures";
    cfg.figure_dir = figures;
    return App::build(cfg, offline(), std::move(model));
}

std::string body(const std::string& text, const std::string& mode = "Deterministic") {
    return json({{"text", text}, {"mode", mode}}).dump();
}

std::optional<double> svg_value(const std::string& svg, const std::string& cls) {
    std::smatch m;
    if (!std::regex_search(svg, m, std::regex("class=\"" + cls + "\" data-value=\"([-0-9.]+)\""))) return std::nullopt;
    return std::stod(m[1]);
}

// ---- primary cases ----

Outcome boston_max(const App& app) {
    Check c;
    Service svc(app);
    const auto before = app.transport().upstream_calls();
    const auto t0 = std::chrono::steady_clock::now();
    auto r = svc.query(body(kBoston2024));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.expect(r.status == 200, fmt::format("status {}", r.status));
    if (r.status != 200) return c.done("");
    auto a = json::parse(r.body);
    const double max = a["data"].value("max", NAN);
    c.expect(std::abs(max - kBostonMax2024) <= kBostonMaxTol, fmt::format("max {} m", max));
    c.expect(a["data"].value("datum", "") == "MSL", "datum is not MSL");
    c.expect(a["text"].get<std::string>().find("2.79 m relative to MSL") != std::string::npos, "text lacks the value");
    const auto& prov = a["provenance"];
    c.expect(prov.size() == 1, "expected one provenance record");
    std::string station, dataset;
    if (!prov.empty()) {
        station = prov[0].value("station_or_grid", "");
        dataset = prov[0].value("dataset_id", "");
        c.expect(station.find("8443970") != std::string::npos, "provenance does not name the station");
        c.expect(!dataset.empty() && !prov[0].value("source_name", "").empty(), "provenance does not name the dataset");
    }
    c.expect(app.transport().upstream_calls() == before, "network was used");
    c.expect(secs < kMaxSeconds, fmt::format("took {:.2f} s", secs));
    return c.done(fmt::format("max={:.3f} m MSL; {}; {}; offline; {:.3f} s", max, station, dataset, secs));
}

Outcome gulf_sst(const App& app) {
    Check c;
    auto r = Service(app).query(body(kGulfSst2019));
    c.expect(r.status == 200, fmt::format("status {}", r.status));
    if (r.status != 200) return c.done("");
    auto a = json::parse(r.body);
    const auto& d = a["data"];
    const double lo = d.value("min", NAN), hi = d.value("max", NAN);
    c.expect(d.value("date", "") == "2019-12-31", "date is " + d.value("date", ""));
    c.expect(std::abs(lo - kGulfSstMin) <= kSstTol, fmt::format("min {}", lo));
    c.expect(std::abs(hi - kGulfSstMax) <= kSstTol, fmt::format("max {}", hi));
    c.expect(a["figures"].size() == 1, "expected one map");
    std::optional<double> cmin, cmax;
    if (a["figures"].size() == 1) {
        auto svg = app.figures().read(a["figures"][0]["hash"]);
        c.expect(svg.has_value(), "map not in the figure store");
        if (svg) {
            cmin = svg_value(*svg, "cbar-min");
            cmax = svg_value(*svg, "cbar-max");
        }
    }
    c.expect(cmin && std::abs(*cmin - lo) <= kColorbarTol, "colorbar min does not match");
    c.expect(cmax && std::abs(*cmax - hi) <= kColorbarTol, "colorbar max does not match");
    return c.done(fmt::format("min={:.2f} max={:.2f} degC on 2019-12-31; colorbar {:.2f}..{:.2f}", lo, hi, cmin.value_or(NAN), cmax.value_or(NAN)));
}

Outcome sea_level_comparison(const App& app) {
    Check c;
    auto r = Service(app).query(body(kSeaLevel2022));
    c.expect(r.status == 200, fmt::format("status {}", r.status));
    if (r.status != 200) return c.done("");
    auto a = json::parse(r.body);
    const auto& d = a["data"];
    c.expect(d.is_object() && d.size() == 2 && d.contains("Boston") && d.contains("Virginia Key"), "payload not keyed by the two locations");
    std::vector<std::size_t> points;
    for (const auto& [label, v] : d.items()) {
        const auto n = v.contains("series") ? v["series"]["values"].size() : 0;
        points.push_back(n);
        c.expect(n == 12, fmt::format("{} has {} points", label, n));
        c.expect(v.value("variable", "") == "MonthlyMeanSeaLevel", label + " is not a monthly series");
    }
    std::set<std::string> stations;
    for (const auto& p : a["provenance"]) stations.insert(p.value("station_or_grid", ""));
    c.expect(a["provenance"].size() == 2 && stations.size() == 2, "expected two provenance records");
    c.expect(a["figures"].size() == 1, fmt::format("{} figures", a["figures"].size()));
    return c.done(fmt::format("series of {} and {} points; {} provenance records; {} figure", points.empty() ? 0 : points[0],
                              points.size() < 2 ? 0 : points[1], a["provenance"].size(), a["figures"].size()));
}

Outcome cora_june(const App& app) {
    Check c;
    auto r = Service(app).query(body(kCoraJune1993));
    c.expect(r.status == 200, fmt::format("status {}", r.status));
    if (r.status != 200) return c.done("");
    auto a = json::parse(r.body);
    const auto& d = a["data"];
    for (const char* k : {"min", "max", "mean", "std"})
        c.expect(d.contains(k) && d[k].is_number() && std::isfinite(d[k].get<double>()), std::string(k) + " missing");
    const auto node_id = d.contains("node") ? d["node"].value("id", std::int64_t{-1}) : -1;
    const double km = d.contains("node") ? d["node"].value("distance_km", NAN) : NAN;
    c.expect(node_id >= 0, "no node id");
    c.expect(km <= kCoraRadiusKm, fmt::format("node at {} km", km));
    bool named = false;
    for (const auto& p : a["provenance"])
        named |= p.value("station_or_grid", "").find(fmt::format("node {}", node_id)) != std::string::npos;
    c.expect(named, "no provenance entry names the node");
    return c.done(fmt::format("min={:.3f} max={:.3f} mean={:.4f} std={:.3f} m; node {} at {:.2f} km", d.value("min", NAN), d.value("max", NAN),
                              d.value("mean", NAN), d.value("std", NAN), node_id, km));
}

// ---- property suite ----

std::string stats_property(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> val(-1000.0, 1000.0);
    for (int trial = 0; trial < kStatsTrials; ++trial) {
        const std::size_t n = 1 + rng() % 400;
        const double p_missing = (rng() % 50) / 100.0;
        const bool ties = rng() % 3 == 0;
        std::vector<Timestamp> ts;
        std::vector<double> vs;
        std::vector<std::uint8_t> ok;
        Timestamp t = make_timestamp(1990 + static_cast<int>(rng() % 30), 1, 1);
        for (std::size_t i = 0; i < n; ++i) {
            ts.push_back(t);
            t += std::chrono::hours(1 + rng() % 48);
            double v = val(rng);
            vs.push_back(ties ? std::round(v / 250.0) * 250.0 : v);
            ok.push_back(std::uniform_real_distribution<double>(0, 1)(rng) >= p_missing);
        }
        ok[rng() % n] = 1;
        Series s(Variable::WaterLevel, Unit::Meters, std::string("MSL"), ts, vs, ok);
        auto got = summary_stats(s);

        std::size_t count = 0, imin = 0, imax = 0;
        long double sum = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!ok[i]) continue;
            if (count == 0 || vs[i] < vs[imin]) imin = i;
            if (count == 0 || vs[i] > vs[imax]) imax = i;
            sum += vs[i];
            ++count;
        }
        const long double mean = sum / count;
        long double ss = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (ok[i]) ss += (vs[i] - mean) * (vs[i] - mean);
        const double sd = static_cast<double>(std::sqrt(ss / count));
        auto close = [](double a, double b) { return std::abs(a - b) <= kStatsRelTol * std::max(1.0, std::abs(b)); };
        if (got.count != count || got.min != vs[imin] || got.max != vs[imax] || got.argmin_time != ts[imin] || got.argmax_time != ts[imax] ||
            !close(got.mean, static_cast<double>(mean)) || !close(got.std, sd))
            return fmt::format("summary_stats trial {} disagrees with brute force", trial);
    }
    return "";
}

std::string trend_property(std::mt19937_64& rng, double& worst) {
    std::uniform_real_distribution<double> slope(-50.0, 50.0), icpt(-10.0, 10.0);
    for (int trial = 0; trial < kTrendTrials; ++trial) {
        const std::size_t n = 2 + rng() % 200;
        double b = slope(rng);
        if (std::abs(b) < 1e-3) b = 1.0;
        const double a = icpt(rng);
        std::vector<TimedValue> pts;
        Timestamp t0 = make_timestamp(1950 + static_cast<int>(rng() % 60), 1 + rng() % 12, 1);
        Timestamp t = t0;
        for (std::size_t i = 0; i < n; ++i) {
            const double years = std::chrono::duration<double>(t - t0).count() / (365.2425 * 86400.0);
            pts.push_back({t, a + b * years});
            t += std::chrono::hours(1 + rng() % (24 * 60));
        }
        auto r = linear_trend(pts);
        const double rel = std::abs(r.slope_per_year - b) / std::abs(b);
        worst = std::max(worst, rel);
        if (rel > kTrendRelTol) return fmt::format("linear_trend trial {}: slope {} vs planted {}", trial, r.slope_per_year, b);
    }
    return "";
}

double great_circle_km(double lat1, double lon1, double lat2, double lon2) {
    constexpr double d2r = 3.14159265358979323846 / 180.0;
    const double p1 = lat1 * d2r, p2 = lat2 * d2r, dl = (lon2 - lon1) * d2r;
    const double y = std::hypot(std::cos(p2) * std::sin(dl), std::cos(p1) * std::sin(p2) - std::sin(p1) * std::cos(p2) * std::cos(dl));
    const double x = std::sin(p1) * std::sin(p2) + std::cos(p1) * std::cos(p2) * std::cos(dl);
    return 6371.0 * std::atan2(y, x);
}

std::string nearest_property(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < kNodeTrials; ++trial) {
        const double clat = 60.0 * u(rng), clon = 170.0 * u(rng), spread = 0.1 + 5.0 * std::abs(u(rng));
        std::vector<Node> nodes(1 + rng() % 300);
        for (auto& n : nodes) n = {clat + spread * u(rng), clon + spread * u(rng), rng() % 4 != 0};
        nodes[rng() % nodes.size()].valid = true;
        GeoPoint p{clat + spread * u(rng), clon + spread * u(rng)};
        auto got = nearest_node(p, nodes);
        std::size_t best = nodes.size();
        double best_km = INFINITY;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (!nodes[i].valid) continue;
            const double km = great_circle_km(p.lat, p.lon, nodes[i].lat, nodes[i].lon);
            if (km < best_km) best = i, best_km = km;
        }
        if (got.index != best || std::abs(got.distance_km - best_km) > kDistanceTolKm)
            return fmt::format("nearest_node trial {}: index {} vs {}", trial, got.index, best);
    }
    return "";
}

std::string retrieval_property(std::mt19937_64& rng) {
    static const std::vector<std::string> vocab = {"tide", "gauge", "surge", "datum", "harbor", "reanalysis", "mesh", "node", "satellite",
                                                   "coral", "bleaching", "temperature", "anomaly", "monthly", "mean", "sea", "level",
                                                   "trend", "hurricane", "estuary", "station", "buoy", "current", "salinity", "grid"};
    auto words = [&](std::size_t n) {
        std::string s;
        for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + vocab[rng() % vocab.size()];
        return s;
    };
    for (int trial = 0; trial < kStoreTrials; ++trial) {
        DocStore store(std::make_shared<HashingEmbedder>());
        for (int d = 0; d < kStoreChunks; ++d) store.ingest(fmt::format("doc{:02d}", d), words(4 + rng() % 30), {fmt::format("Doc {}", d), 2000 + d, ""});
        if (store.size() != static_cast<std::size_t>(kStoreChunks)) return fmt::format("store {} holds {} chunks", trial, store.size());
        const std::string q = words(2 + rng() % 5);
        const std::size_t k = 1 + rng() % 10;
        auto got = store.search(q, k);

        const auto qe = store.embedder().embed(q);
        auto cos = [&](const std::vector<double>& e) {
            long double dot = 0, na = 0, nb = 0;
            for (std::size_t i = 0; i < e.size(); ++i) dot += qe[i] * e[i], na += qe[i] * qe[i], nb += e[i] * e[i];
            return na == 0 || nb == 0 ? 0.0 : static_cast<double>(dot / std::sqrt(na * nb));
        };
        std::map<std::string, double> oracle;
        std::vector<double> ranked;
        for (const auto& ch : store.chunks()) {
            const double s = cos(store.embedder().embed(ch.text));
            oracle[ch.doc_id] = s;
            ranked.push_back(s);
        }
        std::sort(ranked.rbegin(), ranked.rend());
        if (got.size() != std::min<std::size_t>(k, ranked.size())) return fmt::format("store {}: {} results for k={}", trial, got.size(), k);
        for (std::size_t i = 0; i < got.size(); ++i) {
            const double s = oracle[got[i].chunk.doc_id];
            if (std::abs(s - ranked[i]) > kScoreTol || std::abs(got[i].score - s) > kScoreTol)
                return fmt::format("store {}: rank {} holds score {} where exhaustive ranking has {}", trial, i, s, ranked[i]);
        }
    }
    return "";
}

std::string threshold_property(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> val(10.0, 32.0);
    for (int trial = 0; trial < kThresholdTrials; ++trial) {
        const std::size_t rows = 1 + rng() % 30, cols = 1 + rng() % 30;
        std::vector<double> lats(rows), lons(cols), vs(rows * cols);
        std::vector<std::uint8_t> ok(rows * cols);
        for (std::size_t i = 0; i < rows; ++i) lats[i] = 20.0 + 0.05 * i;
        for (std::size_t j = 0; j < cols; ++j) lons[j] = -90.0 + 0.05 * j;
        for (std::size_t i = 0; i < vs.size(); ++i) vs[i] = std::round(val(rng) * 100.0) / 100.0, ok[i] = rng() % 5 != 0;
        ok[rng() % ok.size()] = 1;
        GridSlice g(Variable::SeaSurfaceTemperature, Unit::Celsius, make_timestamp(2019, 12, 31, 12), lats, lons, vs, ok);
        std::vector<double> thresholds = {9.0, 33.0};
        for (int k = 0; k < 20; ++k) thresholds.push_back(rng() % 2 ? val(rng) : vs[rng() % vs.size()]);
        std::sort(thresholds.begin(), thresholds.end());
        double prev = 1.0;
        for (double th : thresholds) {
            auto r = threshold_mask(g, th);
            std::size_t unmasked = 0, above = 0;
            for (std::size_t i = 0; i < vs.size(); ++i)
                if (ok[i]) ++unmasked, above += vs[i] >= th;
            if (r.exceed_count != above || r.unmasked_count != unmasked) return fmt::format("threshold_mask trial {} miscounts at {}", trial, th);
            if (r.fraction > prev) return fmt::format("threshold_mask trial {}: fraction rises from {} to {} at {}", trial, prev, r.fraction, th);
            prev = r.fraction;
        }
        if (threshold_mask(g, 9.0).fraction != 1.0 || threshold_mask(g, 33.0).fraction != 0.0) return "threshold_mask bounds";
    }
    return "";
}

Outcome property_suite() {
    std::mt19937_64 rng(0x0cea4);
    double worst_trend = 0.0;
    Check c;
    for (auto* run : {+[](std::mt19937_64& r, double&) { return stats_property(r); }, +[](std::mt19937_64& r, double& w) { return trend_property(r, w); },
                      +[](std::mt19937_64& r, double&) { return nearest_property(r); }, +[](std::mt19937_64& r, double&) { return retrieval_property(r); },
                      +[](std::mt19937_64& r, double&) { return threshold_property(r); }}) {
        try {
            auto why = run(rng, worst_trend);
            c.expect(why.empty(), why);
        } catch (const std::exception& e) {
            c.expect(false, std::string("threw: ") + e.what());
        }
    }
    return c.done(fmt::format("summary_stats {} series; linear_trend {} fits, worst rel err {:.1e}; nearest_node {} sets; search {} stores of {} chunks; "
                              "threshold_mask {} grids",
                              kStatsTrials, kTrendTrials, worst_trend, kNodeTrials, kStoreTrials, kStoreChunks, kThresholdTrials));
}

// ---- grounding guard ----

class ScriptedModel final : public ModelClient {
public:
    explicit ScriptedModel(std::string final_text) : final_(std::move(final_text)) {}
    json complete(const json& request) const override {
        const auto& msgs = request.at("messages");
        const bool have_tool_result = std::any_of(msgs.begin(), msgs.end(), [](const json& m) { return m.value("role", "") == "tool"; });
        json message = {{"role", "assistant"}, {"content", final_}};
        if (!have_tool_result) {
            json args = {{"station", "Boston"}, {"begin", "2024-01-01"}, {"end", "2024-12-31"}, {"stat", "max"}};
            message = {{"role", "assistant"},
                       {"content", nullptr},
                       {"tool_calls", json::array({{{"id", "call_0"}, {"type", "function"}, {"function", {{"name", "get_water_level"}, {"arguments", args.dump()}}}}})}};
        }
        return {{"choices", json::array({{{"index", 0}, {"message", message}}})}};
    }
    std::string model() const override { return "scripted"; }

private:
    std::string final_;
};

Outcome grounding_guard(const fs::path& scratch) {
    Check c;
    auto perturbed = replay_app(scratch / "perturbed", std::make_shared<ScriptedModel>("Boston peaked at 2.83 m above MSL in 2024."));
    auto r = Service(*perturbed).query(body(kBoston2024, "ModelBacked"));
    c.expect(r.status == 200, fmt::format("status {}", r.status));
    if (r.status != 200) return c.done("");
    auto a = json::parse(r.body);
    const auto& fb = a["diagnostics"].value("fallback", json::object());
    c.expect(fb.value("code", "") == "SynthesisNumericMismatch", "no SynthesisNumericMismatch fallback");
    c.expect(fb.value("offending", json::array()) == json::array({"2.83"}), "offending literal not reported");
    const std::string text = a["text"];
    c.expect(text.find("2.83") == std::string::npos, "perturbed number reached the answer");
    auto direct = perturbed->registry().dispatch({"get_water_level", {{"station", "Boston"}, {"begin", "2024-01-01"}, {"end", "2024-12-31"}, {"stat", "max"}}},
                                                 {false});
    c.expect(a["data"] == direct.json_data, "answer data differs from the tool json_data");
    c.expect(text.rfind(direct.text, 0) == 0, "answer is not the deterministic template");
    auto check = check_numbers(text, a["data"]);
    c.expect(check.ok, "final text has numbers absent from json_data");

    auto faithful = replay_app(scratch / "faithful", std::make_shared<ScriptedModel>("Boston peaked at 2.79 m above MSL in 2024."));
    auto ok = json::parse(Service(*faithful).query(body(kBoston2024, "ModelBacked")).body);
    c.expect(!ok["diagnostics"].contains("fallback") && ok["text"].get<std::string>().rfind("Boston peaked at 2.79 m", 0) == 0,
             "a faithful model answer was rejected");
    return c.done(fmt::format("2.83 rejected as {}; fallback text carries {} data literals, all in json_data; faithful 2.79 kept",
                              fb.value("code", ""), decimal_literals(text).size()));
}

// ---- determinism ----

Outcome determinism(const fs::path& scratch) {
    Check c;
    auto one = replay_app(scratch / "run1");
    auto two = replay_app(scratch / "run2");
    std::size_t figures = 0, bytes = 0;
    for (const auto& q : kCaseQueries) {
        auto a = Service(*one).query(body(q));
        auto b = Service(*two).query(body(q));
        c.expect(a.status == 200 && b.status == 200, fmt::format("status {}/{} for {}", a.status, b.status, q));
        c.expect(a.body == b.body, "responses differ for " + q);
        bytes += a.body.size();
        if (a.status != 200) continue;
        const auto parsed = json::parse(a.body);
        for (const auto& f : parsed["figures"]) {
            const std::string hash = f["hash"];
            auto fa = one->figures().read(hash), fb = two->figures().read(hash);
            c.expect(fa && fb && *fa == *fb && sha256_hex(*fa) == hash, "figure bytes differ for " + hash.substr(0, 12));
            ++figures;
        }
    }
    c.expect(one->transport().upstream_calls() == 0 && two->transport().upstream_calls() == 0, "network was used");
    return c.done(fmt::format("{} queries, {} response bytes and {} SVG files identical across two runs", kCaseQueries.size(), bytes, figures));
}

// ---- robustness ----

json valid_value(std::mt19937_64& rng, const ParamSpec& p) {
    switch (p.type) {
        case ParamType::Enum: return p.enum_domain[rng() % p.enum_domain.size()];
        case ParamType::Date: {
            static const std::vector<std::string> d = {"2024-01-01", "2024-12-31", "2020-05-01", "2022-12-31", "1993-06-01", "2019-12-31", "2030-01-01"};
            return d[rng() % d.size()];
        }
        case ParamType::Station: {
            static const std::vector<std::string> s = {"Boston", "8443970", "Virginia Key", "0000000", "gulf_of_mexico"};
            return s[rng() % s.size()];
        }
        case ParamType::Location: return rng() % 2 ? json("Boston") : json({{"lat", 42.35}, {"lon", -71.05}});
        case ParamType::Region: return rng() % 2 ? json("gulf_of_mexico") : json("24,31,-98,-80");
        case ParamType::Integer: return static_cast<int>(rng() % 30) - 5;
        case ParamType::Number: return std::uniform_real_distribution<double>(-5, 40)(rng);
        default: return "tide gauge datum";
    }
}

std::string call_fuzz(const App& app, std::mt19937_64& rng, std::map<std::string, int>& outcomes) {
    const auto fns = app.registry().list();
    for (int trial = 0; trial < kCallFuzzTrials; ++trial) {
        const FunctionDescriptor* f = &fns[rng() % fns.size()];
        FunctionCall call{rng() % 10 == 0 ? std::string("get_") + fuzz::random_json(rng).dump() : f->name, json::object()};
        if (rng() % 12 == 0) call.args = fuzz::random_json(rng, 2);
        else {
            for (const auto& p : f->params) {
                if (rng() % 5 == 0) continue;
                call.args[p.name] = rng() % 3 == 0 ? fuzz::random_json(rng, 2) : valid_value(rng, p);
            }
            if (rng() % 8 == 0) call.args[fuzz::random_json(rng, 3).dump()] = 1;
        }
        try {
            app.registry().dispatch(call, {false});
            ++outcomes["ok"];
        } catch (const Error& e) {
            ++outcomes[std::string(to_string(e.code()))];
            if (e.code() != ErrorCode::ArgValidation && e.code() != ErrorCode::UnknownFunction && e.code() != ErrorCode::UpstreamFailure)
                return fmt::format("call {} raised {}", call.to_json().dump(), to_string(e.code()));
            if (auto why = fuzz::rejection_problem(e.to_json())) return fmt::format("call {}: {}", call.to_json().dump(), *why);
        } catch (const std::exception& e) {
            return fmt::format("call {} raised an unstructured exception: {}", call.to_json().dump(), e.what());
        }
        try {
            FunctionCall::from_json(fuzz::random_json(rng));
        } catch (const Error& e) {
            if (auto why = fuzz::rejection_problem(e.to_json())) return "FunctionCall::from_json: " + *why;
        } catch (const std::exception& e) {
            return std::string("FunctionCall::from_json raised an unstructured exception: ") + e.what();
        }
    }
    return "";
}

Outcome robustness(const App& app) {
    Check c;
    std::mt19937_64 rng(0x5eed);
    Service svc(app);
    std::map<int, int> statuses;
    std::vector<std::string> seeds = kCaseQueries;
    seeds.push_back(kBoston2024);
    for (int trial = 0; trial < kBodyFuzzTrials && c.failures.empty(); ++trial) {
        const auto b = fuzz::query_body(rng, seeds, trial);
        auto r = svc.query(b);
        ++statuses[r.status];
        const bool allowed = r.status == 200 || r.status == 400 || r.status == 422 || r.status == 502 || r.status == 503;
        c.expect(allowed && json::accept(r.body), fmt::format("status {} for body {}", r.status, b.substr(0, 80)));
        if (allowed && r.status != 200 && json::accept(r.body)) {
            auto why = fuzz::rejection_problem(json::parse(r.body).value("error", json()));
            c.expect(!why, why.value_or(""));
        }
    }
    std::map<std::string, int> outcomes;
    auto why = call_fuzz(app, rng, outcomes);
    c.expect(why.empty(), why);
    std::vector<std::string> s, o;
    for (auto [k, v] : statuses) s.push_back(fmt::format("{}x{}", v, k));
    for (auto& [k, v] : outcomes) o.push_back(fmt::format("{}x{}", v, k));
    return c.done(fmt::format("{} bodies ({}); {} calls ({}); every rejection names a parameter or diagnostic", kBodyFuzzTrials, fmt::join(s, " "),
                              kCallFuzzTrials, fmt::join(o, " ")));
}

}  // namespace

int main() {
    spdlog::set_level(spdlog::level::off);
    TempDir scratch("run");
    std::unique_ptr<App> app;
    try {
        app = replay_app(scratch.path / "figures");
    } catch (const Error& e) {
        std::cout << "FAIL setup: " << e.to_json().dump() << "\n";
        return 1;
    }

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"boston-2024-max-water-level", [&] { return boston_max(*app); }},
        {"gulf-of-mexico-sst-2019-12-31", [&] { return gulf_sst(*app); }},
        {"boston-virginia-key-2022-monthly-comparison", [&] { return sea_level_comparison(*app); }},
        {"cora-boston-june-1993", [&] { return cora_june(*app); }},
        {"property-suite", [] { return property_suite(); }},
        {"grounding-guard", [&] { return grounding_guard(scratch.path); }},
        {"replay-determinism", [&] { return determinism(scratch.path); }},
        {"robustness", [&] { return robustness(*app); }},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << fmt::format("{} [{}] {}: {}", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail) << std::endl;
    }
    std::cout << fmt::format("{}/{} criteria passed", criteria.size() - failed, criteria.size()) << std::endl;
    return failed ? 1 : 0;
}
