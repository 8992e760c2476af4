// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "oceanqa/types.hpp"

namespace oceanqa {

/// Append-only directory of `<sha256>.svg` files plus `manifest.json`
/// (hash -> alt text and kind). FigureRef::path is the store-relative file
/// name; resolve() gives the on-disk location.
class FigureStore {
public:
    explicit FigureStore(std::filesystem::path dir);

    FigureRef put(const std::string& svg, const std::string& alt_text, FigureKind kind);
    std::optional<std::string> read(const std::string& hash) const;
    std::filesystem::path resolve(const FigureRef& ref) const { return dir_ / ref.path; }
    std::optional<FigureRef> find(const std::string& hash) const;
    const std::filesystem::path& dir() const noexcept { return dir_; }

    static bool is_hash(std::string_view s) noexcept;

private:
    std::filesystem::path dir_;
    mutable std::mutex mu_;
};

struct Trace {
    const Series* series = nullptr;
    SummaryStats stats;
    std::string label;  // location name, used in the legend
};

enum class Colormap { Thermal, Viridis };

/// Pure SVG builders; same inputs give the same bytes.
std::string timeseries_svg(const std::vector<Trace>& traces, const std::string& title);
std::string map_svg(const GridSlice& g, Colormap cmap, const std::string& title);

std::string timeseries_alt_text(const std::vector<Trace>& traces, const std::string& title);
std::string map_alt_text(const GridSlice& g, const std::string& title);

/// 1-2 traces. Throws EmptySeries if any trace has no points.
FigureRef render_timeseries(FigureStore& store, const std::vector<Trace>& traces, const std::string& title);
/// Throws FullyMasked when no cell is valid.
FigureRef render_map(FigureStore& store, const GridSlice& g, Colormap cmap, const std::string& title);

/// RGB for t in [0, 1].
std::string colormap_hex(Colormap cmap, double t);

}  // namespace oceanqa
