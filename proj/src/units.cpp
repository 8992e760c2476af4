// SPDX-License-Identifier: Apache-2.0
#include "oceanqa/units.hpp"

#include <string>

#include "oceanqa/error.hpp"

namespace oceanqa {

std::string_view unit_code(Unit u) noexcept {
    switch (u) {
        case Unit::Meters: return "m";
        case Unit::Feet: return "ft";
        case Unit::Celsius: return "degC";
        case Unit::Fahrenheit: return "degF";
    }
    return "m";
}

std::string_view unit_symbol(Unit u) noexcept {
    switch (u) {
        case Unit::Meters: return "m";
        case Unit::Feet: return "ft";
        case Unit::Celsius: return "°C";
        case Unit::Fahrenheit: return "°F";
    }
    return "m";
}

std::optional<Unit> unit_from_code(std::string_view code) noexcept {
    if (code == "m" || code == "meters" || code == "metre" || code == "meter") return Unit::Meters;
    if (code == "ft" || code == "feet") return Unit::Feet;
    if (code == "degC" || code == "degree_C" || code == "Celsius" || code == "celsius" || code == "C")
        return Unit::Celsius;
    if (code == "degF" || code == "degree_F" || code == "Fahrenheit" || code == "F") return Unit::Fahrenheit;
    return std::nullopt;
}

namespace {
bool is_length(Unit u) { return u == Unit::Meters || u == Unit::Feet; }
}  // namespace

bool convertible(Unit from, Unit to) noexcept { return is_length(from) == is_length(to); }

double convert_value(double v, Unit from, Unit to) {
    if (from == to) return v;
    if (!convertible(from, to))
        throw Error(ErrorCode::UnitMismatch,
                    "cannot convert " + std::string(unit_code(from)) + " to " + std::string(unit_code(to)));
    switch (from) {
        case Unit::Feet: return v * 0.3048;
        case Unit::Meters: return v / 0.3048;
        case Unit::Fahrenheit: return (v - 32.0) * 5.0 / 9.0;
        case Unit::Celsius: return v * 9.0 / 5.0 + 32.0;
    }
    return v;
}

}  // namespace oceanqa
