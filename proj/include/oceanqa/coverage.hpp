// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "oceanqa/types.hpp"

namespace oceanqa {

struct CoverageWindow {
    std::string dataset_id;
    std::string source_name;
    Timestamp start{};
    std::optional<Timestamp> end;  // nullopt: still being produced
};

/// Published temporal coverage of each dataset family, loaded from a
/// versioned config file.
class CoverageTable {
public:
    static CoverageTable from_json(const nlohmann::json& j);
    static CoverageTable load(const std::filesystem::path& path);

    const std::string& version() const noexcept { return version_; }
    const CoverageWindow& window(DatasetFamily family) const;

private:
    std::string version_;
    std::map<DatasetFamily, CoverageWindow> windows_;
};

struct CheckedRange {
    TimeRange range;
    std::optional<std::string> clamp_note;  // set when the range was narrowed
};

/// Rejects empty ranges and illegal resolutions; clamps to the dataset's
/// coverage window, reporting the clamp so callers can record it.
CheckedRange validate_time_range(const TimeRange& tr, Variable v, const CoverageTable& coverage);

}  // namespace oceanqa
