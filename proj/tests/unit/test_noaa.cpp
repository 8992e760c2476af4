// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <unistd.h>

#include <atomic>
#include <fstream>
#include <random>
#include <thread>

#include <nlohmann/json.hpp>

#include "oceanqa/analysis.hpp"
#include "oceanqa/error.hpp"
#include "oceanqa/netcdf.hpp"
#include "oceanqa/noaa.hpp"
#include "synth/synthetic_provider.hpp"

using namespace oceanqa;
namespace fs = std::filesystem;

namespace {

const std::string kData = OCEANQA_DATA_DIR;
const Timestamp kNow = make_timestamp(2025, 1, 15, 12);

struct TempDir {
    fs::path path;
    TempDir() {
        static std::atomic<int> n{0};
        path = fs::temp_directory_path() / ("oceanqa_noaa_" + std::to_string(::getpid()) + "_" + std::to_string(n++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an error";
    return ErrorCode::Internal;
}

struct Rig {
    TempDir dir;
    std::shared_ptr<Transport> transport;
    NoaaClients clients;

    explicit Rig(ProviderConfig cfg = ProviderConfig::load(kData + "/providers.json"), synth::SyntheticProvider::Limits limits = {},
                 double rate = 1000.0)
        : transport(std::make_shared<Transport>(TransportConfig{TransportMode::RecordThenReplay, dir.path, rate},
                                                synth::SyntheticProvider(limits), [] { return kNow; })),
          clients(transport, std::move(cfg), CoverageTable::load(kData + "/coverage.json")) {}
};

TimeRange days(int y, unsigned m, unsigned d0, unsigned d1, Resolution r = Resolution::Hourly) {
    return {make_timestamp(y, m, d0), end_of_day(make_timestamp(y, m, d1)), r};
}

}  // namespace

// ---- transport ----

TEST(Transport, FingerprintIgnoresParamOrder) {
    HttpRequest a{"https://h/p", {{"b", "2"}, {"a", "1 x"}}, "", false};
    HttpRequest b{"https://h/p", {{"a", "1 x"}, {"b", "2"}}, "", false};
    EXPECT_EQ(fingerprint(a), fingerprint(b));
    EXPECT_EQ(canonical_url(a), "https://h/p?a=1%20x&b=2");
    HttpRequest c{"https://h/p", {{"a", "1 x"}, {"b", "3"}}, "", false};
    EXPECT_NE(fingerprint(a), fingerprint(c));
    EXPECT_EQ(fingerprint(a).size(), 64u);
}

TEST(Transport, ReplayMissIsNonRetryableProviderError) {
    TempDir d;
    Transport t({TransportMode::Replay, d.path}, [](const std::string&, std::chrono::seconds) -> HttpResponse {
        ADD_FAILURE() << "replay must not go upstream";
        return {};
    });
    HttpRequest r{"https://h/p", {{"a", "1"}}, "", false};
    try {
        t.get(r);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ProviderError);
        EXPECT_EQ(e.details().at("retryable"), false);
        EXPECT_EQ(e.details().at("fingerprint"), fingerprint(r));
    }
}

TEST(Transport, RecordThenReplayServesSameBytes) {
    TempDir d;
    int calls = 0;
    auto fetcher = [&](const std::string& url, std::chrono::seconds) {
        ++calls;
        return HttpResponse{200, "body for " + url, "text/plain"};
    };
    HttpRequest r{"https://h/p", {{"a", "1"}}, "", true};
    {
        Transport rec({TransportMode::RecordThenReplay, d.path}, fetcher);
        auto first = rec.get(r);
        auto second = rec.get(r);
        EXPECT_EQ(first.bytes, second.bytes);
        EXPECT_EQ(calls, 1);
    }
    Transport replay({TransportMode::Replay, d.path}, fetcher);
    EXPECT_EQ(replay.get(r).bytes, "body for https://h/p?a=1");
    EXPECT_EQ(calls, 1);
    EXPECT_EQ(replay.store().size(), 1u);
}

TEST(Transport, LiveTtlAndClosedRange) {
    TempDir d;
    int calls = 0;
    Timestamp now = kNow;
    auto fetcher = [&](const std::string&, std::chrono::seconds) {
        ++calls;
        return HttpResponse{200, std::to_string(calls), "text/plain"};
    };
    Transport t({TransportMode::Live, d.path}, fetcher, [&] { return now; });
    HttpRequest recent{"https://h/recent", {}, "", false};
    HttpRequest closed{"https://h/closed", {}, "", true};
    t.get(recent);
    t.get(closed);
    now += std::chrono::hours{23};
    EXPECT_EQ(t.get(recent).bytes, "1");
    now += std::chrono::hours{2};
    EXPECT_EQ(t.get(recent).bytes, "3");
    EXPECT_EQ(t.get(closed).bytes, "2");
    EXPECT_EQ(calls, 3);
}

TEST(Transport, ServerErrorsAreNotCached) {
    TempDir d;
    int calls = 0;
    Transport t({TransportMode::RecordThenReplay, d.path}, [&](const std::string&, std::chrono::seconds) {
        ++calls;
        return HttpResponse{503, "busy", "text/plain"};
    });
    HttpRequest r{"https://h/p", {}, "", true};
    EXPECT_EQ(t.get(r).status, 503);
    EXPECT_EQ(t.get(r).status, 503);
    EXPECT_EQ(calls, 2);
    EXPECT_EQ(t.store().size(), 0u);
}

TEST(Transport, CoalescesIdenticalInFlightRequests) {
    TempDir d;
    std::atomic<int> calls{0};
    Transport t({TransportMode::RecordThenReplay, d.path}, [&](const std::string&, std::chrono::seconds) {
        ++calls;
        std::this_thread::sleep_for(std::chrono::milliseconds(150));
        return HttpResponse{200, "x", "text/plain"};
    });
    HttpRequest r{"https://h/p", {{"k", "v"}}, "", true};
    std::vector<std::thread> threads;
    for (int i = 0; i < 8; ++i) threads.emplace_back([&] { EXPECT_EQ(t.get(r).bytes, "x"); });
    for (auto& th : threads) th.join();
    EXPECT_EQ(calls.load(), 1);
    EXPECT_EQ(t.upstream_calls(), 1u);
}

TEST(Transport, RateLimitSpacesRequestsPerHost) {
    TempDir d;
    Transport t({TransportMode::RecordThenReplay, d.path, 20.0},
                [](const std::string&, std::chrono::seconds) { return HttpResponse{200, "x", "text/plain"}; });
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < 5; ++i) t.get({"https://h/p", {{"i", std::to_string(i)}}, "", true});
    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    EXPECT_GE(elapsed, 4 * 0.05 - 0.01);
    const auto other = std::chrono::steady_clock::now();
    t.get({"https://other/p", {}, "", true});
    EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - other).count(), 0.04);
}

TEST(Transport, CorruptIndexIsConfigError) {
    TempDir d;
    std::ofstream(d.path / "index.json") << "{not json";
    EXPECT_EQ(code_of([&] { FixtureStore s(d.path); }), ErrorCode::ConfigError);
}

// ---- CO-OPS parsing ----

TEST(CoopsParse, JsonMasksFlagsAndEmpties) {
    const std::string body = R"({"metadata":{"id":"1","name":"X","lat":"0","lon":"0"},"data":[
        {"t":"2024-01-01 00:00","v":"1.000","s":"0.01","f":"0,0,0,0","q":"v"},
        {"t":"2024-01-01 00:06","v":"9.000","s":"0.01","f":"0,1,0,0","q":"v"},
        {"t":"2024-01-01 00:12","v":"","s":"","f":"0,0,0,0","q":"p"},
        {"t":"2024-01-01 00:18","v":"-0.500","s":"0.01","f":"1,0,0,0","q":"p"}]})";
    CoopsParseStats st;
    std::string name;
    auto s = parse_coops_json(body, {1, 2, 3}, std::string("MSL"), &st, &name);
    ASSERT_EQ(s.size(), 4u);
    EXPECT_EQ(name, "X");
    EXPECT_EQ(s.at(0), 1.0);
    EXPECT_FALSE(s.valid(1));
    EXPECT_FALSE(s.valid(2));
    EXPECT_EQ(s.at(3), -0.5);
    EXPECT_EQ(st.flagged, 1u);
    EXPECT_EQ(st.empty, 1u);
    EXPECT_EQ(st.verified, 2u);
    EXPECT_EQ(st.preliminary, 2u);
}

TEST(CoopsParse, ErrorMessagesMapToCodes) {
    auto msg = [](const std::string& m) { return R"({"error":{"message":")" + m + R"("}})"; };
    EXPECT_EQ(code_of([&] { parse_coops_json(msg("No data was found. This product may not be offered"), {}, std::nullopt); }),
              ErrorCode::GapOnly);
    EXPECT_EQ(code_of([&] { parse_coops_json(msg("Wrong Station ID: Check that you have the correct station id"), {}, std::nullopt); }),
              ErrorCode::StationUnknown);
    EXPECT_EQ(code_of([&] { parse_coops_json(msg("The range of dates requested exceeds 31 days"), {}, std::nullopt); }),
              ErrorCode::ProviderError);
    EXPECT_EQ(code_of([&] { parse_coops_json("<html>oops</html>", {}, std::nullopt); }), ErrorCode::ProviderError);
}

TEST(CoopsParse, MonthlyCsvReadsNamedColumn) {
    const std::string body =
        " Year, Month, Highest, MHHW, MSL, Lowest\n"
        "2022, 1, 1.9, 1.5, 0.051, -1.8\n"
        "2022, 2, , , , \n"
        "2022, 3, 1.8, 1.4, 0.077, -1.7\n";
    auto s = parse_coops_monthly_csv(body, "MSL", std::string("MSL"));
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s.timestamps()[1], make_timestamp(2022, 2, 1));
    EXPECT_DOUBLE_EQ(*s.at(0), 0.051);
    EXPECT_FALSE(s.valid(1));
    EXPECT_DOUBLE_EQ(*s.at(2), 0.077);
    EXPECT_EQ(code_of([&] { parse_coops_monthly_csv(body, "Bogus", std::nullopt); }), ErrorCode::ProviderError);
}

TEST(CoopsParse, CfTimes) {
    auto t = decode_cf_times({0, 3600, 86400}, "seconds since 1970-01-01 00:00:00");
    EXPECT_EQ(t[1], make_timestamp(1970, 1, 1, 1));
    auto h = decode_cf_times({24}, "hours since 2000-01-01");
    EXPECT_EQ(h[0], make_timestamp(2000, 1, 2));
    EXPECT_EQ(code_of([] { decode_cf_times({1}, "fortnights since 2000-01-01"); }), ErrorCode::FormatError);
}

TEST(SplitWindow, CoversExactlyWithoutOverlap) {
    std::mt19937 rng(7);
    for (int i = 0; i < 200; ++i) {
        const auto start = make_timestamp(2020, 1, 1) + std::chrono::minutes(rng() % 500000);
        const auto end = start + std::chrono::minutes(rng() % 2000000);
        const int max_days = 1 + static_cast<int>(rng() % 40);
        auto w = split_window(start, end, max_days);
        ASSERT_FALSE(w.empty());
        EXPECT_EQ(w.front().first, start);
        EXPECT_EQ(w.back().second, end);
        for (std::size_t k = 0; k < w.size(); ++k) {
            EXPECT_LE(w[k].second - w[k].first, std::chrono::days{max_days});
            if (k) EXPECT_EQ(w[k].first, w[k - 1].second + std::chrono::minutes{1});
        }
    }
}

// ---- clients against the synthetic provider ----

TEST(Clients, BostonHourlyYearMaxIsPlantedPeak) {
    Rig rig;
    auto f = rig.clients.fetch_water_level("8443970", {make_timestamp(2024, 1, 1), end_of_day(make_timestamp(2024, 12, 31)), Resolution::Hourly},
                                           "MSL", Resolution::Hourly);
    EXPECT_EQ(f.data.size(), 366u * 24u);
    auto stats = summary_stats(f.data);
    EXPECT_NEAR(stats.max, synth::SyntheticProvider::kBostonPeak, 1e-9);
    EXPECT_EQ(to_civil(stats.argmax_time).day, 13u);
    EXPECT_EQ(f.provenance.dataset_id, "noaa-coops-hourly-height");
    EXPECT_EQ(f.provenance.station_or_grid, "station 8443970 (Boston)");
    EXPECT_EQ(f.provenance.datum, "MSL");
    EXPECT_GE(rig.transport->upstream_calls(), 2u);
}

TEST(Clients, ChunkedFetchEqualsSingleRequest) {
    auto tr = days(2023, 3, 1, 31, Resolution::SixMinute);
    Rig whole;
    auto cfg = ProviderConfig::load(kData + "/providers.json");
    cfg.coops.products.at(Resolution::SixMinute).max_days = 3;
    Rig chunked(cfg, {3, 365, 3653});
    auto a = whole.clients.fetch_water_level("8518750", tr, "MLLW", Resolution::SixMinute);
    auto b = chunked.clients.fetch_water_level("8518750", tr, "MLLW", Resolution::SixMinute);
    EXPECT_EQ(a.data, b.data);
    EXPECT_EQ(whole.transport->upstream_calls(), 1u);
    EXPECT_EQ(chunked.transport->upstream_calls(), 11u);
    EXPECT_EQ(a.data.size(), 31u * 240u);
}

TEST(Clients, MaskIsSoundAgainstRawPayload) {
    Rig rig;
    auto tr = days(2022, 5, 1, 20, Resolution::SixMinute);
    auto f = rig.clients.fetch_water_level("8723214", tr, "MSL", Resolution::SixMinute);
    // independent read of every stored payload
    std::map<Timestamp, bool> expect_valid;
    for (const auto& entry : fs::directory_iterator(rig.dir.path)) {
        if (entry.path().extension() != ".bin") continue;
        std::ifstream in(entry.path());
        auto j = nlohmann::json::parse(in);
        for (const auto& row : j.at("data")) {
            const auto fl = row.at("f").get<std::string>();
            const bool bad = fl[2] == '1' || fl[4] == '1' || fl[6] == '1';
            expect_valid[*parse_timestamp(row.at("t").get<std::string>())] = !bad && !row.at("v").get<std::string>().empty();
        }
    }
    ASSERT_EQ(expect_valid.size(), f.data.size());
    std::size_t masked = 0;
    for (std::size_t i = 0; i < f.data.size(); ++i) {
        EXPECT_EQ(f.data.valid(i), expect_valid.at(f.data.timestamps()[i]));
        masked += f.data.valid(i) ? 0 : 1;
        if (f.data.valid(i)) EXPECT_LT(std::abs(*f.data.at(i)), 3.0);
    }
    EXPECT_GT(masked, 0u);
}

TEST(Clients, DatumShiftsLevels) {
    Rig rig;
    auto tr = days(2021, 7, 1, 2);
    auto msl = rig.clients.fetch_water_level("8443970", tr, "MSL", Resolution::Hourly).data;
    auto mllw = rig.clients.fetch_water_level("8443970", tr, "MLLW", Resolution::Hourly).data;
    ASSERT_EQ(msl.size(), mllw.size());
    std::optional<double> offset;
    for (std::size_t i = 0; i < msl.size(); ++i) {
        if (!msl.valid(i) || !mllw.valid(i)) continue;
        const double d = *mllw.at(i) - *msl.at(i);
        if (!offset) offset = d;
        EXPECT_NEAR(d, *offset, 0.0011);
    }
    ASSERT_TRUE(offset);
    EXPECT_GT(*offset, 1.0);
}

TEST(Clients, ProviderErrorsSurfaceAsCodes) {
    Rig rig;
    EXPECT_EQ(code_of([&] { rig.clients.fetch_water_level("0000000", days(2024, 1, 1, 2), "MSL", Resolution::Hourly); }),
              ErrorCode::StationUnknown);
    EXPECT_EQ(code_of([&] { rig.clients.fetch_water_level("BOS", days(2024, 1, 1, 2), "MSL", Resolution::Hourly); }),
              ErrorCode::StationUnknown);
    EXPECT_EQ(code_of([&] { rig.clients.fetch_water_level("8443970", days(1900, 1, 1, 2), "MSL", Resolution::Hourly); }),
              ErrorCode::GapOnly);
    EXPECT_EQ(code_of([&] { rig.clients.fetch_water_level("8443970", days(2030, 1, 1, 2), "MSL", Resolution::Hourly); }),
              ErrorCode::GapOnly);
}

TEST(Clients, WindowLimitViolationIsProviderError) {
    auto cfg = ProviderConfig::load(kData + "/providers.json");
    cfg.coops.products.at(Resolution::SixMinute).max_days = 60;
    Rig rig(cfg);
    try {
        rig.clients.fetch_water_level("8443970", {make_timestamp(2022, 1, 1), end_of_day(make_timestamp(2022, 2, 20)), Resolution::SixMinute},
                                      "MSL", Resolution::SixMinute);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ProviderError);
        EXPECT_NE(e.details().dump().find("exceeds"), std::string::npos);
    }
}

TEST(Clients, MonthlyMeanMatchesModelAverage) {
    Rig rig;
    auto f = rig.clients.fetch_monthly_mean("8638610", {make_timestamp(2015, 1, 1), end_of_day(make_timestamp(2015, 12, 31)), Resolution::Monthly},
                                            "MSL");
    ASSERT_EQ(f.data.size(), 12u);
    for (std::size_t i = 0; i < 12; ++i) {
        if (!f.data.valid(i)) continue;
        const auto c = to_civil(f.data.timestamps()[i]);
        double sum = 0;
        int n = 0;
        for (unsigned d = 1; d <= days_in_month(c.year, c.month); ++d)
            for (int h = 0; h < 24; ++h, ++n) sum += synth::model_level("8638610", make_timestamp(c.year, c.month, d, h));
        EXPECT_NEAR(*f.data.at(i), sum / n, 0.0006);
    }
}

TEST(Clients, CoraPicksNearestWetNode) {
    Rig rig;
    const GeoPoint boston{42.3548, -71.0534};
    auto f = rig.clients.fetch_cora_series(boston, days(2012, 10, 28, 31));
    EXPECT_EQ(f.series.size(), 4u * 24u);
    EXPECT_LE(f.distance_km, 50.0);
    EXPECT_GT(f.series.valid_count(), 0u);
    EXPECT_NEAR(haversine_km(boston, f.node), f.distance_km, 1e-9);
    EXPECT_NE(f.provenance.station_or_grid.find("node " + std::to_string(f.node_id)), std::string::npos);
    // identity: the node's own position selects itself at distance zero
    auto self = rig.clients.fetch_cora_series(f.node, days(2012, 10, 28, 31));
    EXPECT_EQ(self.node_id, f.node_id);
    EXPECT_NEAR(self.distance_km, 0.0, 1e-9);
    EXPECT_EQ(self.series, f.series);
}

TEST(Clients, CoraInlandHasNoValidNode) {
    Rig rig;
    EXPECT_EQ(code_of([&] { rig.clients.fetch_cora_series({39.0, -98.0}, days(2010, 1, 1, 2)); }), ErrorCode::NoValidNode);
    EXPECT_EQ(code_of([&] { rig.clients.fetch_cora_series({39.0, -98.0}, days(2024, 1, 1, 2)); }), ErrorCode::OutOfCoverage);
}

TEST(Clients, GulfSstPlantedExtremes) {
    Rig rig;
    BBox gulf{18, 31, -98, -80};
    auto f = rig.clients.fetch_sst(gulf, make_timestamp(2019, 12, 31), "gulf_of_mexico");
    auto g = grid_stats(f.data);
    EXPECT_NEAR(g.min, synth::SyntheticProvider::kGulfSstMin, 1e-6);
    EXPECT_NEAR(g.max, synth::SyntheticProvider::kGulfSstMax, 1e-6);
    EXPECT_GT(g.masked_count, 0u);
    EXPECT_EQ(f.data.rows(), 260u);
    EXPECT_EQ(f.data.cols(), 360u);
    EXPECT_LT(f.data.lats().front(), f.data.lats().back());
    EXPECT_EQ(f.provenance.dataset_id, "noaa-crw-coraltemp-v3.1");
}

TEST(Clients, SstOnLandOrFutureDay) {
    Rig rig;
    auto land = rig.clients.fetch_sst({33.0, 34.0, -90.0, -89.0}, make_timestamp(2020, 6, 1), "inland");
    EXPECT_EQ(land.data.valid_count(), 0u);
    EXPECT_EQ(code_of([&] { grid_stats(land.data); }), ErrorCode::FullyMasked);
    EXPECT_EQ(code_of([&] { rig.clients.fetch_sst({24, 25, -85, -84}, make_timestamp(2025, 1, 15), "x"); }), ErrorCode::GapOnly);
}

TEST(Clients, SstTinyGridWithFillCell) {
    // hand-built payload: descending latitude, one fill cell, packed shorts
    netcdf::Writer w;
    w.add_dimension("time", 1).add_dimension("latitude", 2).add_dimension("longitude", 2);
    w.add_variable({"time", netcdf::Type::Double, {"time"}, {netcdf::Attribute::of_text("units", "seconds since 1970-01-01T00:00:00Z")},
                    {1577793600.0}, {}});
    w.add_variable({"latitude", netcdf::Type::Double, {"latitude"}, {}, {25.025, 24.975}, {}});
    w.add_variable({"longitude", netcdf::Type::Double, {"longitude"}, {}, {-85.025, -84.975}, {}});
    w.add_variable({"CRW_SST",
                    netcdf::Type::Short,
                    {"time", "latitude", "longitude"},
                    {netcdf::Attribute::of_text("units", "degree_C"), netcdf::Attribute::of_numbers("_FillValue", netcdf::Type::Short, {-32768}),
                     netcdf::Attribute::of_numbers("scale_factor", netcdf::Type::Float, {0.01})},
                    {2500, -32768, 2400, 2600},
                    {}});
    const auto bytes = w.serialize();
    TempDir d;
    auto t = std::make_shared<Transport>(TransportConfig{TransportMode::RecordThenReplay, d.path},
                                         [&](const std::string&, std::chrono::seconds) { return HttpResponse{200, bytes, "application/x-netcdf"}; },
                                         [] { return kNow; });
    NoaaClients c(t, ProviderConfig::load(kData + "/providers.json"), CoverageTable::load(kData + "/coverage.json"));
    auto f = c.fetch_sst({24.9, 25.1, -85.1, -84.9}, make_timestamp(2019, 12, 31), "tiny");
    ASSERT_EQ(f.data.rows(), 2u);
    EXPECT_DOUBLE_EQ(f.data.lats()[0], 24.975);
    EXPECT_NEAR(f.data.value(0, 0), 24.0, 1e-5);
    EXPECT_NEAR(f.data.value(0, 1), 26.0, 1e-5);
    EXPECT_NEAR(f.data.value(1, 0), 25.0, 1e-5);
    EXPECT_FALSE(f.data.valid(1, 1));
    auto g = grid_stats(f.data);
    EXPECT_EQ(g.count, 3u);
    EXPECT_NEAR(g.mean, 25.0, 1e-5);
}

TEST(Clients, ReplayReproducesRecordedRun) {
    Rig rig;
    auto tr = days(2023, 8, 1, 3);
    auto live = rig.clients.fetch_water_level("9414290", tr, "MSL", Resolution::Hourly);
    auto replay_t = std::make_shared<Transport>(TransportConfig{TransportMode::Replay, rig.dir.path},
                                                [](const std::string&, std::chrono::seconds) -> HttpResponse {
                                                    throw Error(ErrorCode::ProviderUnavailable, "offline");
                                                },
                                                [] { return kNow; });
    NoaaClients replay(replay_t, ProviderConfig::load(kData + "/providers.json"), CoverageTable::load(kData + "/coverage.json"));
    auto again = replay.fetch_water_level("9414290", tr, "MSL", Resolution::Hourly);
    EXPECT_EQ(live.data, again.data);
    EXPECT_EQ(live.provenance, again.provenance);
    EXPECT_EQ(replay_t->upstream_calls(), 0u);
}
