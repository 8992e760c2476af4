// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>
#include <regex>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "oceanqa/analysis.hpp"
#include "oceanqa/serialization.hpp"
#include "support/rig.hpp"

using namespace oceanqa;
using namespace oceanqa::testing;
using nlohmann::json;

namespace {

FunctionDescriptor dummy(std::string name, std::vector<ParamSpec> params = {}) {
    return {std::move(name), "test function", std::move(params), [](const CallContext&) { return ToolResponse{}; }};
}

ParamSpec p(std::string name, ParamType t, bool required) {
    ParamSpec s;
    s.name = std::move(name);
    s.type = t;
    s.required = required;
    return s;
}

std::set<std::string> violated_params(const Error& e) {
    std::set<std::string> out;
    for (const auto& v : e.details().at("violations")) out.insert(v.at("param").get<std::string>());
    return out;
}

Pipeline& pipe() {
    static Pipeline p;
    return p;
}

std::string dataset_for(const std::string& function, const json& args) {
    static const auto cfg = ProviderConfig::load(kData + "/providers.json");
    if (function == "get_water_level")
        return cfg.coops.products.at(args.at("interval") == "six_minute" ? Resolution::SixMinute : Resolution::Hourly).dataset_id;
    if (function == "get_monthly_mean_sea_level") return cfg.coops.products.at(Resolution::Monthly).dataset_id;
    if (function == "get_cora_series") return cfg.cora.dataset_id;
    if (function == "get_sst") return cfg.crw.dataset_id;
    return "docstore/hashing-v1";
}

void expect_closed(const ToolResponse& r) {
    auto j = encode(r);
    auto problems = validate_tool_response(j);
    EXPECT_TRUE(problems.empty()) << (problems.empty() ? "" : problems.front());
    ASSERT_TRUE(r.others.contains("provenance"));
    for (const auto& pv : r.others["provenance"]) {
        EXPECT_FALSE(pv["processing_steps"].empty());
        EXPECT_FALSE(pv["dataset_id"].get<std::string>().empty());
    }
}

}  // namespace

// ---- registry ----

TEST(Registry, RegisterAndList) {
    Registry reg(pipe().gazetteer);
    EXPECT_TRUE(reg.emit_function_schemas().empty());
    reg.add(dummy("f"));
    ASSERT_EQ(reg.size(), 1u);
    EXPECT_EQ(reg.list()[0].name, "f");
    EXPECT_EQ(code_of([&] { reg.add(dummy("f")); }), ErrorCode::DuplicateName);
    EXPECT_EQ(reg.size(), 1u);
    EXPECT_EQ(code_of([&] { reg.add(dummy("")); }), ErrorCode::InvalidValue);
    EXPECT_EQ(code_of([&] { reg.add(dummy("g", {p("a", ParamType::Text, true), p("a", ParamType::Text, true)})); }),
              ErrorCode::InvalidValue);
}

TEST(Registry, RequiredParamsListedFirst) {
    Registry reg(pipe().gazetteer);
    reg.add(dummy("f", {p("x", ParamType::Text, false), p("y", ParamType::Date, true), p("z", ParamType::Number, false),
                        p("w", ParamType::Integer, true)}));
    std::vector<std::string> names;
    for (const auto& s : reg.list()[0].params) names.push_back(s.name);
    EXPECT_EQ(names, (std::vector<std::string>{"y", "w", "x", "z"}));
}

TEST(Registry, DefaultSetInStableOrder) {
    const auto& reg = pipe().registry;
    std::vector<std::string> names;
    for (const auto& f : reg.list()) names.push_back(f.name);
    EXPECT_EQ(names, (std::vector<std::string>{"get_water_level", "get_monthly_mean_sea_level", "get_cora_series", "get_sst",
                                               "search_documents"}));
    auto schemas = reg.emit_function_schemas();
    ASSERT_EQ(schemas.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(schemas[i]["function"]["name"], names[i]);
}

TEST(Registry, SchemaShape) {
    Registry reg(pipe().gazetteer);
    reg.add(pipe().registry.list()[0]);
    auto s = reg.emit_function_schemas();
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0]["type"], "function");
    const auto& f = s[0]["function"];
    EXPECT_EQ(f["name"], "get_water_level");
    EXPECT_EQ(f["parameters"]["required"], json({"station", "begin", "end"}));
    EXPECT_EQ(f["parameters"]["additionalProperties"], false);
    const auto& props = f["parameters"]["properties"];
    for (const char* k : {"station", "begin", "end", "datum", "interval"}) EXPECT_TRUE(props.contains(k)) << k;
    EXPECT_EQ(props["interval"]["enum"], json({"hourly", "six_minute"}));
    EXPECT_EQ(props["datum"]["default"], "MSL");
    EXPECT_EQ(props["begin"]["format"], "date");
    EXPECT_EQ(props["station"]["x-semantic-type"], "station");
    for (const auto& [k, v] : props.items()) {
        EXPECT_TRUE(v.contains("type")) << k;
        EXPECT_TRUE(v.contains("description")) << k;
    }
}

// ---- validation ----

TEST(Validate, MissingEndIsNamed) {
    auto e = error_of([] {
        pipe().registry.dispatch({"get_water_level", {{"station", "8443970"}, {"begin", "2020-05-01"}}});
    });
    EXPECT_EQ(e.code(), ErrorCode::ArgValidation);
    EXPECT_EQ(violated_params(e), (std::set<std::string>{"end"}));
}

TEST(Validate, EveryViolationListed) {
    auto e = error_of([] {
        pipe().registry.validate({"get_water_level", {{"station", "Atlantis"}, {"begin", "May 2020"}, {"datum", "XYZ"}, {"colour", 1}}});
    });
    EXPECT_EQ(e.code(), ErrorCode::ArgValidation);
    EXPECT_EQ(violated_params(e), (std::set<std::string>{"station", "begin", "end", "datum", "colour"}));
}

TEST(Validate, EmptyKeyIsNamedAsArguments) {
    auto e = error_of([] { pipe().registry.validate({"get_monthly_mean_sea_level", {{"", 0.5}, {"station", "Boston"}}}); });
    for (const auto& v : e.details()["violations"]) EXPECT_FALSE(v["param"].get<std::string>().empty());
    EXPECT_EQ(violated_params(e), (std::set<std::string>{"arguments", "begin", "end"}));
}

TEST(Validate, UnknownFunction) {
    auto e = error_of([] { pipe().registry.dispatch({"get_ssh", json::object()}); });
    EXPECT_EQ(e.code(), ErrorCode::UnknownFunction);
    EXPECT_EQ(e.details()["available"].size(), 5u);
}

TEST(Validate, NormalizesHumanReadableValues) {
    const auto& reg = pipe().registry;
    auto a = reg.validate({"get_water_level", {{"station", "  boston   HARBOR "}, {"begin", "20200501"}, {"end", "2020-05-31T12:00Z"}, {"interval", "SIX_MINUTE"}}});
    EXPECT_EQ(a["station"], "8443970");
    EXPECT_EQ(a["begin"], "2020-05-01");
    EXPECT_EQ(a["end"], "2020-05-31");
    EXPECT_EQ(a["interval"], "six_minute");
    EXPECT_EQ(a["datum"], "MSL");
    EXPECT_EQ(a["stat"], "full_series");

    auto by_name = reg.validate({"get_sst", {{"region", "Gulf of Mexico"}, {"date", "2019-12-31"}}});
    auto by_key = reg.validate({"get_sst", {{"region", "gulf_of_mexico"}, {"date", "2019-12-31"}}});
    auto by_box = reg.validate({"get_sst", {{"region", "18,31,-98,-80"}, {"date", "2019-12-31"}}});
    EXPECT_EQ(by_name, by_key);
    for (const char* k : {"lat_min", "lat_max", "lon_min", "lon_max"}) EXPECT_EQ(by_name["region"][k], by_box["region"][k]);

    auto loc = reg.validate({"get_cora_series", {{"location", "42.3548, -71.0534"}, {"begin", "1993-06-01"}, {"end", "1993-06-30"}}});
    auto named = reg.validate({"get_cora_series", {{"location", "Boston"}, {"begin", "1993-06-01"}, {"end", "1993-06-30"}}});
    EXPECT_DOUBLE_EQ(loc["location"]["lat"], named["location"]["lat"]);
    EXPECT_DOUBLE_EQ(loc["location"]["lon"], named["location"]["lon"]);
    EXPECT_EQ(named["location"]["name"], "Boston");

    EXPECT_EQ(reg.validate({"search_documents", {{"query", "datums"}, {"k", "3"}}})["k"], 3);
}

TEST(FunctionCallJson, ToolCallShapes) {
    auto c = FunctionCall::from_json(json::parse(R"({"type":"function","function":{"name":"get_sst","arguments":"{\"region\":\"Gulf of Mexico\",\"date\":\"2019-12-31\"}"}})"));
    EXPECT_EQ(c.name, "get_sst");
    EXPECT_EQ(c.args["date"], "2019-12-31");
    auto plain = FunctionCall::from_json({{"name", "search_documents"}, {"arguments", {{"query", "x"}}}});
    EXPECT_EQ(plain.args["query"], "x");
    EXPECT_EQ(FunctionCall::from_json({{"name", "f"}}).args, json::object());
    EXPECT_EQ(code_of([] { FunctionCall::from_json({{"name", "f"}, {"arguments", "{not json"}}); }), ErrorCode::MalformedRequest);
    EXPECT_EQ(code_of([] { FunctionCall::from_json(json::array()); }), ErrorCode::MalformedRequest);
    EXPECT_EQ(code_of([] { FunctionCall::from_json({{"name", 3}}); }), ErrorCode::MalformedRequest);
    EXPECT_EQ(FunctionCall::from_json(c.to_json()).args, c.args);
}

// ---- handlers ----

TEST(Dispatch, BostonMaximum2024) {
    auto r = pipe().registry.dispatch(
        {"get_water_level", {{"station", "Boston"}, {"begin", "2024-01-01"}, {"end", "2024-12-31"}, {"stat", "max"}}});
    expect_closed(r);
    EXPECT_NEAR(r.json_data["value"].get<double>(), synth::SyntheticProvider::kBostonPeak, 1e-9);
    EXPECT_EQ(r.json_data["max"], r.json_data["value"]);
    EXPECT_EQ(r.json_data["datum"], "MSL");
    EXPECT_EQ(r.json_data["unit"], "m");
    EXPECT_EQ(r.json_data["series"]["timestamps"].size(), 8784u);
    EXPECT_NE(r.text.find("2.79 m relative to MSL"), std::string::npos) << r.text;
    EXPECT_NE(r.text.find("8443970"), std::string::npos);
    EXPECT_NE(r.text.find("noaa-coops-hourly-height"), std::string::npos);
    EXPECT_EQ(r.others["function"], "get_water_level");
    EXPECT_EQ(r.others["arguments"]["station"], "8443970");
    ASSERT_EQ(r.others["provenance"].size(), 1u);
    EXPECT_NE(r.others["provenance"][0]["station_or_grid"].get<std::string>().find("8443970"), std::string::npos);
    ASSERT_EQ(r.images.size(), 1u);
    EXPECT_TRUE(fs::exists(pipe().figures->resolve(r.images[0])));

    auto s = decode_series(r.json_data["series"]);
    auto oracle = summary_stats(s);
    EXPECT_EQ(r.json_data["argmax_time"], format_iso(oracle.argmax_time));
    EXPECT_EQ(r.json_data["at"], format_iso(oracle.argmax_time));
}

TEST(Dispatch, HourlyMonthSeries) {
    auto r = pipe().registry.dispatch({"get_water_level", {{"station", "8443970"}, {"begin", "2020-05-01"}, {"end", "2020-05-31"}}});
    expect_closed(r);
    EXPECT_EQ(r.json_data["point_count"], 31u * 24u);
    EXPECT_EQ(r.json_data["stat"], "full_series");
    auto s = decode_series(r.json_data["series"]);
    auto oracle = summary_stats(s);
    EXPECT_DOUBLE_EQ(r.json_data["min"].get<double>(), oracle.min);
    EXPECT_DOUBLE_EQ(r.json_data["mean"].get<double>(), oracle.mean);
    EXPECT_EQ(r.json_data["count"], oracle.count);
    EXPECT_EQ(r.others["time_span"]["resolution"], "Hourly");
}

TEST(Dispatch, GulfSst) {
    auto r = pipe().registry.dispatch({"get_sst", {{"region", "Gulf of Mexico"}, {"date", "2019-12-31"}, {"threshold", 26}}});
    expect_closed(r);
    EXPECT_NEAR(r.json_data["min"].get<double>(), synth::SyntheticProvider::kGulfSstMin, 1e-6);
    EXPECT_NEAR(r.json_data["max"].get<double>(), synth::SyntheticProvider::kGulfSstMax, 1e-6);
    EXPECT_NE(r.text.find("13.04"), std::string::npos);
    EXPECT_NE(r.text.find("28.34"), std::string::npos);
    EXPECT_EQ(r.others["unit"], "degC");
    const double frac = r.json_data["threshold"]["fraction"];
    EXPECT_GT(frac, 0.0);
    EXPECT_LT(frac, 1.0);
    ASSERT_EQ(r.images.size(), 1u);
    EXPECT_EQ(r.images[0].kind, FigureKind::Map);
    auto svg = *pipe().figures->read(r.images[0].hash);
    std::smatch m;
    ASSERT_TRUE(std::regex_search(svg, m, std::regex(R"re(class="cbar-min" data-value="([-0-9.]+)")re")));
    EXPECT_EQ(m[1].str(), "13.04");
    ASSERT_TRUE(std::regex_search(svg, m, std::regex(R"re(class="cbar-max" data-value="([-0-9.]+)")re")));
    EXPECT_EQ(m[1].str(), "28.34");
}

TEST(Dispatch, CoraNode) {
    auto r = pipe().registry.dispatch({"get_cora_series", {{"location", "Boston"}, {"begin", "1993-06-01"}, {"end", "1993-06-30"}}});
    expect_closed(r);
    EXPECT_EQ(r.json_data["point_count"], 30u * 24u);
    EXPECT_LE(r.json_data["node"]["distance_km"].get<double>(), 50.0);
    const auto node_id = std::to_string(r.json_data["node"]["id"].get<long long>());
    EXPECT_NE(r.others["provenance"][0]["station_or_grid"].get<std::string>().find("node " + node_id), std::string::npos);
    for (const char* k : {"min", "max", "mean", "std"}) EXPECT_TRUE(r.json_data[k].is_number()) << k;
}

TEST(Dispatch, MonthlyMeanCarriesTrend) {
    auto r = pipe().registry.dispatch({"get_monthly_mean_sea_level", {{"station", "Virginia Key"}, {"begin", "2002-01-01"}, {"end", "2010-12-31"}, {"stat", "trend"}}});
    expect_closed(r);
    EXPECT_EQ(r.json_data["point_count"], 108u);
    auto s = decode_series(r.json_data["series"]);
    EXPECT_DOUBLE_EQ(r.json_data["value"].get<double>(), linear_trend(s).slope_per_year);
    EXPECT_NE(r.text.find("mm/yr"), std::string::npos);
}

TEST(Dispatch, DocumentSearch) {
    auto r = pipe().registry.dispatch({"search_documents", {{"query", "nearest wet mesh node for the CORA reanalysis"}, {"k", 2}}});
    expect_closed(r);
    ASSERT_EQ(r.json_data["results"].size(), 2u);
    EXPECT_EQ(r.json_data["results"][0]["doc_id"], "cora_reanalysis");
    EXPECT_TRUE(r.images.empty());
}

TEST(Dispatch, UpstreamErrorsAreWrapped) {
    const auto& reg = pipe().registry;
    auto bad_station = error_of([&] { reg.dispatch({"get_water_level", {{"station", "0000000"}, {"begin", "2020-05-01"}, {"end", "2020-05-02"}}}); });
    EXPECT_EQ(bad_station.code(), ErrorCode::UpstreamFailure);
    EXPECT_EQ(bad_station.details()["cause"], "StationUnknown");
    EXPECT_EQ(bad_station.details()["retryable"], false);
    EXPECT_EQ(bad_station.details()["function"], "get_water_level");

    auto future = error_of([&] { reg.dispatch({"get_water_level", {{"station", "Boston"}, {"begin", "2030-01-01"}, {"end", "2030-01-31"}}}); });
    EXPECT_EQ(future.code(), ErrorCode::UpstreamFailure);
    EXPECT_EQ(future.details()["cause"], "GapOnly");

    auto land = error_of([&] { reg.dispatch({"get_sst", {{"region", "38,40,-100,-97"}, {"date", "2019-12-31"}}}); });
    EXPECT_EQ(land.code(), ErrorCode::UpstreamFailure);
    EXPECT_EQ(land.details()["cause"], "FullyMasked");
}

TEST(Dispatch, RangeProblemsNameTheParameter) {
    const auto& reg = pipe().registry;
    auto reversed = error_of([&] { reg.dispatch({"get_water_level", {{"station", "Boston"}, {"begin", "2020-05-31"}, {"end", "2020-05-01"}}}); });
    EXPECT_EQ(reversed.code(), ErrorCode::ArgValidation);
    EXPECT_EQ(violated_params(reversed), (std::set<std::string>{"end"}));

    auto too_long = error_of([&] { reg.dispatch({"get_water_level", {{"station", "Boston"}, {"begin", "2020-01-01"}, {"end", "2021-12-31"}, {"interval", "six_minute"}}}); });
    EXPECT_EQ(violated_params(too_long), (std::set<std::string>{"end"}));

    auto coverage = error_of([&] { reg.dispatch({"get_cora_series", {{"location", "Boston"}, {"begin", "2024-01-01"}, {"end", "2024-01-31"}}}); });
    EXPECT_EQ(coverage.code(), ErrorCode::ArgValidation);
    EXPECT_EQ(violated_params(coverage), (std::set<std::string>{"begin"}));
    EXPECT_EQ(coverage.details()["violations"][0]["cause"], "OutOfCoverage");
}

TEST(Dispatch, ConcurrentCallsAgree) {
    const FunctionCall call{"get_water_level", {{"station", "Key West"}, {"begin", "2021-03-01"}, {"end", "2021-03-10"}, {"stat", "mean"}}};
    std::vector<json> out(8);
    std::vector<std::thread> threads;
    for (int i = 0; i < 8; ++i) threads.emplace_back([&, i] { out[i] = encode(pipe().registry.dispatch(call)); });
    for (auto& t : threads) t.join();
    for (int i = 1; i < 8; ++i) EXPECT_EQ(out[i].dump(), out[0].dump());
}

// ---- structured dispatch ----

TEST(Structured, FigureOneLowersToOneCall) {
    auto q = parse_query("What is the maximum water level in Boston in 2024?", *pipe().gazetteer, kNow);
    auto calls = lower(q);
    ASSERT_EQ(calls.size(), 1u);
    EXPECT_EQ(calls[0].name, "get_water_level");
    EXPECT_EQ(calls[0].args["stat"], "max");
    auto r = dispatch_structured(pipe().registry, q, pipe().figures.get());
    EXPECT_NEAR(r.json_data["max"].get<double>(), 2.79, 0.01);
}

TEST(Structured, CompareMergesByLocation) {
    auto q = parse_query("What is the sea level in Boston and Virginia Key in 2022?", *pipe().gazetteer, kNow);
    ASSERT_EQ(q.stat, Stat::Compare);
    auto r = dispatch_structured(pipe().registry, q, pipe().figures.get());
    expect_closed(r);
    ASSERT_EQ(r.json_data.size(), 2u);
    for (const char* loc : {"Boston", "Virginia Key"}) {
        ASSERT_TRUE(r.json_data.contains(loc)) << loc;
        EXPECT_EQ(r.json_data[loc]["series"]["timestamps"].size(), 12u);
        EXPECT_EQ(r.json_data[loc]["variable"], "MonthlyMeanSeaLevel");
    }
    EXPECT_EQ(r.others["provenance"].size(), 2u);
    EXPECT_EQ(r.images.size(), 1u);
    EXPECT_FALSE(r.others.contains("errors"));
    auto svg = *pipe().figures->read(r.images[0].hash);
    EXPECT_NE(svg.find("class=\"legend\""), std::string::npos);
    EXPECT_NE(svg.find("Virginia Key"), std::string::npos);
    bool noted = false;
    for (const auto& step : r.others["provenance"][0]["processing_steps"])
        noted |= step.get<std::string>().find("query interpretation") != std::string::npos;
    EXPECT_TRUE(noted);
}

TEST(Structured, ComparePartialFailure) {
    StructuredQuery q;
    q.variable = Variable::MonthlyMeanSeaLevel;
    q.stat = Stat::Compare;
    q.selectors = {StationRef{"8443970"}, StationRef{"0000000"}};
    q.labels = {"Boston", "Nowhere"};
    q.time = {make_timestamp(2022, 1, 1), end_of_day(make_timestamp(2022, 12, 31)), Resolution::Monthly};
    q.dataset_hint = DatasetFamily::CoOpsMonthly;
    auto r = dispatch_structured(pipe().registry, q, pipe().figures.get());
    expect_closed(r);
    EXPECT_EQ(r.json_data.size(), 1u);
    EXPECT_TRUE(r.json_data.contains("Boston"));
    ASSERT_EQ(r.others["errors"].size(), 1u);
    EXPECT_EQ(r.others["errors"][0]["location"], "Nowhere");
    EXPECT_EQ(r.others["errors"][0]["code"], "UpstreamFailure");
    EXPECT_EQ(r.others["provenance"].size(), 1u);
    EXPECT_NE(r.text.find("No result for Nowhere"), std::string::npos);

    q.selectors[0] = StationRef{"0000001"};
    auto e = error_of([&] { dispatch_structured(pipe().registry, q, nullptr); });
    EXPECT_EQ(e.code(), ErrorCode::UpstreamFailure);
    EXPECT_EQ(e.details()["errors"].size(), 2u);
}

TEST(Structured, InvalidQueriesRejected) {
    auto q = parse_query("What is the sea level in Boston and Virginia Key in 2022?", *pipe().gazetteer, kNow);
    q.selectors.pop_back();
    EXPECT_EQ(code_of([&] { lower(q); }), ErrorCode::InvalidQuery);
    auto w = parse_query("What is the maximum water level in Boston in 2024?", *pipe().gazetteer, kNow);
    w.selectors[0] = GeoPoint{42.0, -70.0};
    EXPECT_EQ(code_of([&] { lower(w); }), ErrorCode::InvalidQuery);
}

TEST(Structured, ParserOutputAlwaysValidates) {
    const std::vector<std::string> places = {"Boston", "Virginia Key", "The Battery", "Key West", "San Francisco", "Seattle",
                                             "Sewells Point", "Charleston", "Gulf of Mexico", "Florida Keys", "Gulf of Maine"};
    const std::vector<std::string> templates = {
        "What is the maximum water level in {} in 2024?", "What is the sea level in {} in 2022?",
        "Show {}'s water level from CORA reanalysis in June 1993.", "What was the SST in the {} on December 31, 2019?",
        "lowest tide in {} in March 2021", "sea level trend at {} from 2002 to 2010", "average water level at {} in 2020",
        "6-minute water level at {} relative to MLLW on 2023-08-30", "sea surface temperature near {} on 2020-08-01",
        "standard deviation of water level at {} in May 2020", "What was the water level in {} in May 2020?"};
    int parsed = 0;
    for (const auto& t : templates) {
        for (const auto& place : places) {
            auto text = fmt::format(fmt::runtime(t), place);
            StructuredQuery q;
            try {
                q = parse_query(text, *pipe().gazetteer, kNow);
            } catch (const Error&) {
                continue;
            }
            ++parsed;
            for (const auto& c : lower(q)) EXPECT_NO_THROW(pipe().registry.validate(c)) << text;
        }
    }
    for (const char* compare : {"What is the sea level in Boston and Virginia Key in 2022?",
                                "Compare water level in Seattle and San Francisco in May 2020",
                                "SST in the Gulf of Mexico and the Florida Keys on 2019-12-31"}) {
        auto q = parse_query(compare, *pipe().gazetteer, kNow);
        auto calls = lower(q);
        EXPECT_EQ(calls.size(), 2u);
        for (const auto& c : calls) EXPECT_NO_THROW(pipe().registry.validate(c)) << compare;
        ++parsed;
    }
    EXPECT_GT(parsed, 60);
}

// ---- fuzzing ----

namespace {

struct Pool {
    std::vector<json> valid;
    std::vector<json> invalid;
};

const std::map<std::string, Pool>& pools(const std::string& function) {
    static const Pool station{{"8443970", "Boston", "boston harbor", 8723214, "Key West"},
                              {"", "Atlantis", "Gulf of Mexico", 123, "12345678", true, json::array()}};
    static const Pool date{{"2020-05-01", "2020-05-03", "20200502", "2020-05-02T06:00:00Z"},
                           {"May 2020", "2020-13-01", 2020, "", "1700-01-01", json::object()}};
    static const Pool datum{{"MSL", "mllw", "NAVD"}, {"XYZ", 5, ""}};
    static const Pool interval{{"hourly", "SIX_MINUTE"}, {"daily", json::object()}};
    static const Pool series_stat{{"max", "full_series", "Trend", "mean"}, {"Compare", "median", 1}};
    static const Pool grid_stat{{"max", "full_series", "std"}, {"trend", "median", false}};
    static const Pool label{{"Somewhere", "  Boston  "}, {"", "   ", 42}};
    static const Pool location{{"Boston", "42.35,-71.05", json{{"lat", 42.35}, {"lon", -71.05}}, "8443970"},
                               {"Atlantis", "95,10", json{{"lat", "x"}}, 7, "1,2,3"}};
    static const Pool region{{"gulf_of_mexico", "Gulf of Mexico", "24,26,-82,-80", json{{"lat_min", 24}, {"lat_max", 25}, {"lon_min", -82}, {"lon_max", -81}}, "Key West"},
                             {"Atlantis", "30,20,-82,-80", "0,80,-180,180", 3.5}};
    static const Pool sst_date{{"2019-12-31", "2020-08-01"}, {"yesterday", "2019-02-30", 1}};
    static const Pool threshold{{20, "25.5", -5}, {100, "hot", "nan"}};
    static const Pool query{{"tidal datum", "CORA"}, {"", "   ", 5, std::string(3000, 'a')}};
    static const Pool k{{1, 4, "3", 20}, {0, 21, 2.5, "many"}};

    static const std::map<std::string, std::map<std::string, Pool>> all = {
        {"get_water_level", {{"station", station}, {"begin", date}, {"end", date}, {"datum", datum}, {"interval", interval}, {"stat", series_stat}, {"label", label}}},
        {"get_monthly_mean_sea_level", {{"station", station}, {"begin", date}, {"end", date}, {"datum", datum}, {"stat", series_stat}, {"label", label}}},
        {"get_cora_series", {{"location", location}, {"begin", date}, {"end", date}, {"stat", series_stat}, {"label", label}}},
        {"get_sst", {{"region", region}, {"date", sst_date}, {"threshold", threshold}, {"stat", grid_stat}, {"label", label}}},
        {"search_documents", {{"query", query}, {"k", k}}}};
    return all.at(function);
}

}  // namespace

TEST(Fuzz, ValidationMatchesConstructionOracle) {
    std::mt19937_64 rng(0x5eed);
    const auto& reg = pipe().registry;
    int rejected = 0, accepted = 0;
    for (int trial = 0; trial < 1500; ++trial) {
        const auto& fd = reg.list()[rng() % reg.size()];
        const auto& pp = pools(fd.name);
        FunctionCall call{fd.name, json::object()};
        std::set<std::string> expected;
        for (const auto& spec : fd.params) {
            const auto roll = rng() % 100;
            if (roll < 15) {
                if (spec.required) expected.insert(spec.name);
            } else if (roll < 20) {
                call.args[spec.name] = nullptr;
                if (spec.required) expected.insert(spec.name);
            } else {
                const auto& pool = pp.at(spec.name);
                if (rng() % 100 < 60) {
                    call.args[spec.name] = pool.valid[rng() % pool.valid.size()];
                } else {
                    call.args[spec.name] = pool.invalid[rng() % pool.invalid.size()];
                    expected.insert(spec.name);
                }
            }
        }
        if (rng() % 5 == 0) {
            auto extra = fmt::format("bogus_{}", rng() % 3);
            call.args[extra] = "x";
            expected.insert(extra);
        }
        if (rng() % 40 == 0) {
            call.args = rng() % 2 ? json::array({1, 2}) : json("string args");
            expected = {"arguments"};
        }
        try {
            reg.validate(call);
            EXPECT_TRUE(expected.empty()) << call.to_json().dump();
            ++accepted;
        } catch (const Error& e) {
            ASSERT_EQ(e.code(), ErrorCode::ArgValidation) << call.to_json().dump();
            EXPECT_EQ(violated_params(e), expected) << call.to_json().dump();
            for (const auto& v : e.details()["violations"]) EXPECT_FALSE(v["problem"].get<std::string>().empty());
            ++rejected;
        }
    }
    EXPECT_GT(accepted, 50);
    EXPECT_GT(rejected, 500);
}

TEST(Fuzz, DispatchNeverFailsUnstructured) {
    std::mt19937_64 rng(0xfeed);
    const auto& reg = pipe().registry;
    std::map<std::string, int> outcomes;
    for (int trial = 0; trial < 200; ++trial) {
        const auto& fd = reg.list()[rng() % reg.size()];
        const auto& pp = pools(fd.name);
        FunctionCall call{fd.name, json::object()};
        for (const auto& spec : fd.params) {
            if (!spec.required && rng() % 3 == 0) continue;
            const auto& pool = pp.at(spec.name);
            call.args[spec.name] = rng() % 10 < 8 ? pool.valid[rng() % pool.valid.size()] : pool.invalid[rng() % pool.invalid.size()];
        }
        try {
            auto r = reg.dispatch(call, {.render = false});
            expect_closed(r);
            for (const auto& pv : r.others["provenance"])
                EXPECT_EQ(pv["dataset_id"], dataset_for(fd.name, r.others["arguments"])) << call.to_json().dump();
            ++outcomes["ok"];
        } catch (const Error& e) {
            const auto code = e.code();
            ASSERT_TRUE(code == ErrorCode::ArgValidation || code == ErrorCode::UpstreamFailure)
                << to_string(code) << " " << e.what() << " " << call.to_json().dump();
            if (code == ErrorCode::ArgValidation) {
                ASSERT_FALSE(e.details()["violations"].empty());
                for (const auto& v : e.details()["violations"]) {
                    const auto name = v["param"].get<std::string>();
                    EXPECT_TRUE(call.args.contains(name) || std::any_of(fd.params.begin(), fd.params.end(), [&](const ParamSpec& s) { return s.name == name; }))
                        << name;
                }
            } else {
                EXPECT_FALSE(e.details()["cause"].get<std::string>().empty());
                EXPECT_TRUE(e.details()["retryable"].is_boolean());
            }
            ++outcomes[std::string(to_string(code))];
        } catch (const std::exception& e) {
            FAIL() << "unstructured failure: " << e.what() << " " << call.to_json().dump();
        }
    }
    EXPECT_GT(outcomes["ok"], 20);
    EXPECT_GT(outcomes["ArgValidation"], 20);
}
