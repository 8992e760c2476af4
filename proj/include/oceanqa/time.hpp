// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace oceanqa {

/// All instants are UTC, second resolution.
using Timestamp = std::chrono::sys_seconds;

struct CivilTime {
    int year = 1970;
    unsigned month = 1;
    unsigned day = 1;
    int hour = 0;
    int minute = 0;
    int second = 0;
};

Timestamp make_timestamp(int year, unsigned month, unsigned day, int hour = 0, int minute = 0, int second = 0);
CivilTime to_civil(Timestamp ts);

unsigned days_in_month(int year, unsigned month);
bool is_valid_date(int year, unsigned month, unsigned day);

/// Accepts `YYYY-MM-DD`, `YYYYMMDD`, either followed by ` HH:MM[:SS]` or
/// `THH:MM[:SS]`, optionally suffixed with `Z` or a `+HH:MM`/`-HH:MM` offset.
/// Offsets are folded into UTC. Returns nullopt for anything else.
std::optional<Timestamp> parse_timestamp(std::string_view text);

/// True when the text names only a calendar date (no clock part).
bool is_date_only(std::string_view text);

std::string format_iso(Timestamp ts);     // 2024-01-13T17:00:00Z
std::string format_date(Timestamp ts);    // 2024-01-13
std::string format_minute(Timestamp ts);  // 2024-01-13 17:00

/// Last minute of the civil day containing ts (inclusive range ends use this).
Timestamp end_of_day(Timestamp ts);
Timestamp start_of_day(Timestamp ts);

constexpr double kSecondsPerYear = 365.2425 * 86400.0;

}  // namespace oceanqa
