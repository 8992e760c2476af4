// SPDX-License-Identifier: Apache-2.0
#include "oceanqa/gazetteer.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "oceanqa/error.hpp"
#include "oceanqa/text_util.hpp"

namespace oceanqa {

namespace {

double parse_number(const std::string& s, std::size_t line, std::string_view field) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw Error(ErrorCode::ConfigError, fmt::format("gazetteer line {}: bad {} '{}'", line, field, s),
                {{"line", line}, {"field", std::string(field)}});
}

std::string slug(std::string_view name) {
    std::string out;
    for (char c : normalize_space(name)) out += c == ' ' ? '_' : c;
    return out;
}

}  // namespace

void Gazetteer::add(std::vector<std::string> names, GazetteerEntry entry) {
    if (names.empty()) throw Error(ErrorCode::ConfigError, "gazetteer entry without a name");
    if (entry.kind == GazetteerEntry::Kind::Station) entry.station.validate();
    else entry.bbox.validate();
    if (entry.label.empty()) entry.label = trim(names.front());
    if (entry.kind == GazetteerEntry::Kind::Region && entry.region_key.empty()) entry.region_key = slug(names.front());
    const auto index = entries_.size();
    for (const auto& n : names) {
        auto key = normalize_space(n);
        if (key.empty()) continue;
        if (!by_name_.emplace(key, index).second)
            throw Error(ErrorCode::ConfigError, "duplicate gazetteer name '" + key + "'", {{"name", key}});
        max_words_ = std::max(max_words_, split(key, ' ').size());
    }
    entries_.push_back(std::move(entry));
}

Gazetteer Gazetteer::parse(std::string_view tsv) {
    Gazetteer gz;
    std::istringstream in{std::string(tsv)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty() || line.front() == '#') continue;
        auto cols = split(line, '\t');
        if (cols.size() < 5)
            throw Error(ErrorCode::ConfigError, fmt::format("gazetteer line {}: expected at least 5 columns", lineno),
                        {{"line", lineno}});
        GazetteerEntry e;
        auto names = split(cols[0], ';');
        const auto kind = to_lower(trim(cols[1]));
        e.center = {parse_number(trim(cols[3]), lineno, "lat"), parse_number(trim(cols[4]), lineno, "lon")};
        if (kind == "station") {
            e.kind = GazetteerEntry::Kind::Station;
            e.station.id = trim(cols[2]);
            e.station.name = trim(names.front());
            e.station.lat = e.center.lat;
            e.station.lon = e.center.lon;
            if (cols.size() > 5)
                for (const auto& d : split(cols[5], ','))
                    if (!trim(d).empty()) e.station.supported_datums.push_back(trim(d));
        } else if (kind == "region") {
            e.kind = GazetteerEntry::Kind::Region;
            auto b = split(cols[2], ',');
            if (b.size() != 4)
                throw Error(ErrorCode::ConfigError, fmt::format("gazetteer line {}: region bbox needs 4 numbers", lineno),
                            {{"line", lineno}});
            e.bbox = {parse_number(trim(b[0]), lineno, "lat_min"), parse_number(trim(b[1]), lineno, "lat_max"),
                      parse_number(trim(b[2]), lineno, "lon_min"), parse_number(trim(b[3]), lineno, "lon_max")};
        } else {
            throw Error(ErrorCode::ConfigError, fmt::format("gazetteer line {}: unknown kind '{}'", lineno, kind),
                        {{"line", lineno}});
        }
        try {
            gz.add(std::move(names), std::move(e));
        } catch (const Error& err) {
            if (err.code() == ErrorCode::ConfigError) throw;
            throw Error(ErrorCode::ConfigError, fmt::format("gazetteer line {}: {}", lineno, err.what()),
                        {{"line", lineno}});
        }
    }
    return gz;
}

Gazetteer Gazetteer::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot read gazetteer " + path.string(), {{"path", path.string()}});
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

const GazetteerEntry* Gazetteer::lookup(std::string_view name) const {
    auto it = by_name_.find(normalize_space(name));
    return it == by_name_.end() ? nullptr : &entries_[it->second];
}

const GazetteerEntry* Gazetteer::station_by_id(std::string_view id) const {
    for (const auto& e : entries_)
        if (e.kind == GazetteerEntry::Kind::Station && e.station.id == id) return &e;
    return nullptr;
}

const GazetteerEntry* Gazetteer::region(std::string_view key) const {
    for (const auto& e : entries_)
        if (e.kind == GazetteerEntry::Kind::Region && e.region_key == key) return &e;
    return nullptr;
}

}  // namespace oceanqa
