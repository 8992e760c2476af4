// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "oceanqa/types.hpp"

namespace oceanqa {

struct GazetteerEntry {
    enum class Kind { Station, Region };

    Kind kind = Kind::Station;
    std::string label;  // display name (first name in the config row)
    Station station;    // Kind::Station
    std::string region_key;
    BBox bbox;          // Kind::Region
    GeoPoint center;    // station position or region centroid
};

/// Place-name table. Lookups are case-insensitive and whitespace-normalized.
class Gazetteer {
public:
    static Gazetteer parse(std::string_view tsv);
    static Gazetteer load(const std::filesystem::path& path);

    void add(std::vector<std::string> names, GazetteerEntry entry);

    const GazetteerEntry* lookup(std::string_view name) const;
    const GazetteerEntry* station_by_id(std::string_view id) const;
    const GazetteerEntry* region(std::string_view key) const;

    /// Longest place name, in words; bounds the parser's n-gram scan.
    std::size_t max_name_words() const noexcept { return max_words_; }
    std::size_t size() const noexcept { return entries_.size(); }
    const std::vector<GazetteerEntry>& entries() const noexcept { return entries_; }

private:
    std::vector<GazetteerEntry> entries_;
    std::map<std::string, std::size_t, std::less<>> by_name_;
    std::size_t max_words_ = 0;
};

}  // namespace oceanqa
