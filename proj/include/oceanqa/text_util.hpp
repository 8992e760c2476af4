// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace oceanqa {

/// Hex SHA-256 digest.
std::string sha256_hex(std::string_view bytes);

/// Fixed-point rendering used everywhere a number is shown to a person.
/// Never yields "-0.00".
std::string format_fixed(double value, int decimals = 2);

std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);
std::string trim(std::string_view s);
/// Lower-cases and collapses runs of whitespace to one space.
std::string normalize_space(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

}  // namespace oceanqa
