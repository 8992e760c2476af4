// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <map>
#include <string>

#include "oceanqa/transport.hpp"

namespace oceanqa::synth {

/// Deterministic stand-in for the CO-OPS datagetter, a THREDDS NCSS CORA
/// subset service and ERDDAP griddap. Speaks the same wire formats; values
/// come from a harmonic tide model plus hashed noise, with a handful of
/// planted events used as reproduction targets.
class SyntheticProvider {
public:
    struct Limits {
        int six_minute_days = 31;
        int hourly_days = 365;
        int monthly_days = 3653;
    };

    SyntheticProvider() = default;
    explicit SyntheticProvider(Limits limits) : limits_(limits) {}

    HttpResponse operator()(const std::string& url, std::chrono::seconds timeout) const;

    /// Planted Boston 2024 hourly maximum and Gulf of Mexico SST extremes.
    static constexpr double kBostonPeak = 2.790;
    static constexpr double kGulfSstMin = 13.04;
    static constexpr double kGulfSstMax = 28.34;

private:
    HttpResponse coops(const std::map<std::string, std::string>& q) const;
    HttpResponse cora(const std::map<std::string, std::string>& q) const;
    HttpResponse crw(const std::string& raw_query) const;

    Limits limits_;
};

/// Water level at a station (meters above MSL) from the synthetic model,
/// before flags and rounding.
double model_level(const std::string& station_id, Timestamp t);

}  // namespace oceanqa::synth
