// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string_view>

namespace oceanqa {

enum class Unit { Meters, Feet, Celsius, Fahrenheit };

std::string_view unit_code(Unit u) noexcept;    // "m", "ft", "degC", "degF"
std::string_view unit_symbol(Unit u) noexcept;  // "m", "ft", "°C", "°F"
std::optional<Unit> unit_from_code(std::string_view code) noexcept;

/// Only length<->length and temperature<->temperature conversions exist.
bool convertible(Unit from, Unit to) noexcept;
double convert_value(double v, Unit from, Unit to);

}  // namespace oceanqa
