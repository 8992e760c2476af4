// SPDX-License-Identifier: Apache-2.0
#include "oceanqa/coverage.hpp"

#include <fstream>

#include <fmt/format.h>

#include "oceanqa/error.hpp"

namespace oceanqa {

namespace {

Timestamp parse_or_throw(const nlohmann::json& j, const std::string& what) {
    if (!j.is_string()) throw Error(ErrorCode::ConfigError, "coverage " + what + " must be a date string");
    auto ts = parse_timestamp(j.get<std::string>());
    if (!ts) throw Error(ErrorCode::ConfigError, "coverage " + what + " is not a valid date");
    return *ts;
}

}  // namespace

CoverageTable CoverageTable::from_json(const nlohmann::json& j) {
    CoverageTable table;
    if (!j.is_object() || !j.contains("datasets") || !j["datasets"].is_object())
        throw Error(ErrorCode::ConfigError, "coverage table must contain a 'datasets' object");
    table.version_ = j.value("version", "unversioned");
    for (const auto& [name, entry] : j["datasets"].items()) {
        auto family = dataset_family_from_string(name);
        if (!family) throw Error(ErrorCode::ConfigError, "coverage table names unknown dataset family " + name);
        CoverageWindow w;
        w.dataset_id = entry.value("dataset_id", "");
        w.source_name = entry.value("source_name", "");
        w.start = parse_or_throw(entry.at("start"), name + ".start");
        if (entry.contains("end") && !entry["end"].is_null()) w.end = end_of_day(parse_or_throw(entry["end"], name + ".end"));
        table.windows_[*family] = std::move(w);
    }
    for (auto f : {DatasetFamily::CoOpsRealtime, DatasetFamily::CoOpsMonthly, DatasetFamily::Cora, DatasetFamily::Crw})
        if (!table.windows_.count(f))
            throw Error(ErrorCode::ConfigError, "coverage table lacks " + std::string(to_string(f)));
    return table;
}

CoverageTable CoverageTable::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open coverage table " + path.string(), {{"path", path.string()}});
    try {
        return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigError, "coverage table " + path.string() + ": " + e.what());
    }
}

const CoverageWindow& CoverageTable::window(DatasetFamily family) const { return windows_.at(family); }

CheckedRange validate_time_range(const TimeRange& tr, Variable v, const CoverageTable& coverage) {
    if (!(tr.start < tr.end))
        throw Error(ErrorCode::EmptyRange, fmt::format("time range {} .. {} is empty", format_iso(tr.start), format_iso(tr.end)),
                    {{"start", format_iso(tr.start)}, {"end", format_iso(tr.end)}});
    if (!resolution_allowed(v, tr.resolution))
        throw Error(ErrorCode::ResolutionMismatch,
                    fmt::format("{} data is not available at {} resolution", to_string(v), to_string(tr.resolution)),
                    {{"variable", std::string(to_string(v))}, {"resolution", std::string(to_string(tr.resolution))}});

    const auto& w = coverage.window(dataset_family(v));
    const bool overlaps = tr.end > w.start && (!w.end || tr.start < *w.end);
    if (!overlaps) {
        throw Error(ErrorCode::OutOfCoverage,
                    fmt::format("{} covers {} .. {}; requested {} .. {}", w.dataset_id, format_date(w.start),
                                w.end ? format_date(*w.end) : std::string("present"), format_date(tr.start),
                                format_date(tr.end)),
                    {{"dataset_id", w.dataset_id}, {"coverage_start", format_iso(w.start)},
                     {"coverage_end", w.end ? nlohmann::json(format_iso(*w.end)) : nlohmann::json(nullptr)}});
    }
    CheckedRange out{tr, std::nullopt};
    if (tr.start < w.start) out.range.start = w.start;
    if (w.end && tr.end > *w.end) out.range.end = *w.end;
    if (out.range != tr) {
        out.clamp_note = fmt::format("clamped requested range {} .. {} to {} coverage {} .. {}", format_iso(tr.start),
                                     format_iso(tr.end), w.dataset_id, format_iso(out.range.start),
                                     format_iso(out.range.end));
    }
    return out;
}

}  // namespace oceanqa
