// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oceanqa/coverage.hpp"
#include "oceanqa/transport.hpp"
#include "oceanqa/types.hpp"

namespace oceanqa {

struct CoopsProduct {
    std::string product;  // datagetter product name
    std::string format;   // json | csv
    int max_days = 31;    // per-request window
    std::string dataset_id;
};

struct ProviderConfig {
    struct Coops {
        std::string source_name;
        std::string base_url;
        std::string application;
        std::string units;
        std::string time_zone;
        std::map<Resolution, CoopsProduct> products;
        std::map<std::string, std::vector<int>> bad_flag_positions;
        std::string monthly_value_column;
    } coops;
    struct Cora {
        std::string source_name;
        std::string base_url;
        std::string variable;
        std::string dataset_id;
        double search_radius_km = 50.0;
        int max_days = 366;
    } cora;
    struct Crw {
        std::string source_name;
        std::string base_url;
        std::string variable;
        std::string dataset_id;
        std::string time_of_day;
    } crw;
    std::string version;

    static ProviderConfig from_json(const nlohmann::json& j);
    static ProviderConfig load(const std::filesystem::path& path);
};

template <class T>
struct Fetched {
    T data;
    Provenance provenance;
};

struct CoraFetch {
    Series series;
    GeoPoint node;
    long long node_id = -1;
    double distance_km = 0.0;
    Provenance provenance;
};

/// Clients for the four provider families. Every fetch validates the time
/// range against the coverage table and returns the data with its
/// Provenance (processing_steps describe what the client did).
class NoaaClients {
public:
    NoaaClients(std::shared_ptr<Transport> transport, ProviderConfig config, CoverageTable coverage);

    Fetched<Series> fetch_water_level(const std::string& station_id, const TimeRange& tr, const std::string& datum,
                                      Resolution interval) const;
    Fetched<Series> fetch_monthly_mean(const std::string& station_id, const TimeRange& tr,
                                       const std::string& datum) const;
    CoraFetch fetch_cora_series(GeoPoint p, const TimeRange& tr) const;
    /// `label` names the selection in provenance (region key or bbox text).
    Fetched<GridSlice> fetch_sst(const BBox& box, Timestamp date, const std::string& label) const;

    const ProviderConfig& config() const noexcept { return config_; }
    const CoverageTable& coverage() const noexcept { return coverage_; }
    const Transport& transport() const noexcept { return *transport_; }

private:
    std::shared_ptr<Transport> transport_;
    ProviderConfig config_;
    CoverageTable coverage_;
};

/// Half-open chunk windows [start, end] (inclusive minute ends) of at most
/// `max_days` days covering `tr`.
std::vector<std::pair<Timestamp, Timestamp>> split_window(Timestamp start, Timestamp end, int max_days);

struct CoopsParseStats {
    std::size_t flagged = 0;      // masked by a bad quality flag
    std::size_t empty = 0;        // no value reported
    std::size_t preliminary = 0;  // q == "p"
    std::size_t verified = 0;     // q == "v"
};

/// Parses a CO-OPS datagetter JSON payload. Provider error messages raise
/// StationUnknown, GapOnly or ProviderError.
Series parse_coops_json(const std::string& body, const std::vector<int>& bad_flag_positions,
                        const std::optional<std::string>& datum, CoopsParseStats* stats = nullptr,
                        std::string* station_name = nullptr);
/// Parses a CO-OPS monthly_mean CSV payload, reading `column`.
Series parse_coops_monthly_csv(const std::string& body, const std::string& column,
                               const std::optional<std::string>& datum);

/// Decodes CF "<unit> since <epoch>" numeric times.
std::vector<Timestamp> decode_cf_times(const std::vector<double>& values, const std::string& units);

}  // namespace oceanqa
