// SPDX-License-Identifier: Apache-2.0
#include "oceanqa/rendering.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "oceanqa/analysis.hpp"
#include "oceanqa/error.hpp"
#include "oceanqa/text_util.hpp"

namespace oceanqa {

namespace {

constexpr int kLevels = 128;
constexpr std::string_view kMaskFill = "#d0d0d0";
constexpr std::array<std::string_view, 2> kTraceColors = {"#1f5fa8", "#d1495b"};

std::string esc(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    auto s = fmt::format("{:.1f}", v);
    return s == "-0.0" ? "0.0" : s;
}

std::string_view variable_title(Variable v) {
    switch (v) {
        case Variable::WaterLevel: return "Water level";
        case Variable::MonthlyMeanSeaLevel: return "Monthly mean sea level";
        case Variable::CoraZeta: return "Water level (CORA zeta)";
        case Variable::SeaSurfaceTemperature: return "Sea surface temperature";
    }
    return "Value";
}

std::string axis_label(const Series& s) {
    if (s.datum()) return fmt::format("{} ({}, {})", variable_title(s.variable()), unit_symbol(s.unit()), *s.datum());
    return fmt::format("{} ({})", variable_title(s.variable()), unit_symbol(s.unit()));
}

/// Ticks at 1/2/5 x 10^k covering [lo, hi].
std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
    const double raw = (hi - lo) / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    std::vector<double> out;
    for (double t = std::ceil(lo / step - 1e-9) * step; t <= hi + step * 1e-9; t += step) out.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
    return out;
}

std::string tick_text(double v, double step) {
    const int decimals = step >= 1.0 ? 0 : static_cast<int>(std::ceil(-std::log10(step) - 1e-9));
    return format_fixed(v, decimals);
}

struct TimeTicks {
    std::vector<Timestamp> at;
    int label_kind = 0;  // 0: month, 1: date, 2: date+time
};

TimeTicks time_ticks(Timestamp lo, Timestamp hi) {
    using namespace std::chrono;
    const auto span = hi - lo;
    TimeTicks out;
    for (auto step : {hours{1}, hours{3}, hours{6}, hours{12}, hours{24}, hours{48}, hours{24 * 7}, hours{24 * 14}}) {
        if (span / step > 8) continue;
        out.label_kind = step < hours{24} ? 2 : 1;
        auto t = lo - (lo.time_since_epoch() % step);
        if (step >= hours{24}) t = start_of_day(lo) + (start_of_day(lo) < lo ? days{1} : days{0});
        for (; t <= hi; t += step)
            if (t >= lo) out.at.push_back(t);
        return out;
    }
    for (int months : {1, 2, 3, 6, 12, 24, 60, 120, 240}) {
        const double approx = duration<double>(span).count() / (30.44 * 86400.0 * months);
        if (approx > 8) continue;
        const auto c = to_civil(lo);
        int idx = c.year * 12 + static_cast<int>(c.month) - 1;
        idx = (idx + months - 1) / months * months;
        for (;; idx += months) {
            auto t = make_timestamp(idx / 12, static_cast<unsigned>(idx % 12 + 1), 1);
            if (t > hi) break;
            if (t >= lo) out.at.push_back(t);
        }
        out.label_kind = 0;
        return out;
    }
    return out;
}

std::string time_label(Timestamp t, int kind) {
    const auto c = to_civil(t);
    if (kind == 0) return fmt::format("{:04d}-{:02d}", c.year, c.month);
    if (kind == 1) return format_date(t);
    return fmt::format("{:02d}-{:02d} {:02d}:{:02d}", c.month, c.day, c.hour, c.minute);
}

struct Rgb {
    double r, g, b;
};

Rgb hex_rgb(std::string_view h) {
    auto part = [&](std::size_t i) { return std::stoi(std::string(h.substr(i, 2)), nullptr, 16) / 255.0; };
    return {part(1), part(3), part(5)};
}

const std::vector<std::string_view>& anchors(Colormap c) {
    static const std::vector<std::string_view> thermal = {"#042333", "#2c3395", "#744992", "#b15f82", "#eb7958", "#fbb43d", "#e8fa5b"};
    static const std::vector<std::string_view> viridis = {"#440154", "#482878", "#3e4989", "#31688e", "#26828e",
                                                          "#1f9e89", "#35b779", "#6ece58", "#b5de2b", "#fde725"};
    return c == Colormap::Thermal ? thermal : viridis;
}

std::string level_class(int k) { return "k" + std::to_string(k); }

}  // namespace

std::string colormap_hex(Colormap cmap, double t) {
    const auto& a = anchors(cmap);
    t = std::clamp(t, 0.0, 1.0) * static_cast<double>(a.size() - 1);
    const auto i = std::min(static_cast<std::size_t>(t), a.size() - 2);
    const double f = t - static_cast<double>(i);
    const auto p = hex_rgb(a[i]), q = hex_rgb(a[i + 1]);
    auto mix = [&](double x, double y) { return static_cast<int>(std::lround(255.0 * (x + (y - x) * f))); };
    return fmt::format("#{:02x}{:02x}{:02x}", mix(p.r, q.r), mix(p.g, q.g), mix(p.b, q.b));
}

// ---- time series ----

std::string timeseries_svg(const std::vector<Trace>& traces, const std::string& title) {
    if (traces.empty() || traces.size() > 2)
        throw Error(ErrorCode::InvalidValue, "a time-series figure takes one or two traces", {{"field", "series"}, {"count", traces.size()}});
    for (const auto& tr : traces)
        if (!tr.series || tr.series->empty() || tr.series->valid_count() == 0)
            throw Error(ErrorCode::EmptySeries, "cannot plot an empty series", {{"field", "series"}, {"label", tr.label}});

    constexpr double W = 900, H = 460, L = 80, R = 30, T = 50, B = 70;
    const double pw = W - L - R, ph = H - T - B;
    Timestamp t0 = traces[0].series->timestamps().front(), t1 = traces[0].series->timestamps().back();
    double v0 = traces[0].stats.min, v1 = traces[0].stats.max;
    for (const auto& tr : traces) {
        t0 = std::min(t0, tr.series->timestamps().front());
        t1 = std::max(t1, tr.series->timestamps().back());
        v0 = std::min(v0, tr.stats.min);
        v1 = std::max(v1, tr.stats.max);
    }
    if (t1 == t0) {
        t0 -= std::chrono::hours{1};
        t1 += std::chrono::hours{1};
    }
    if (v1 - v0 < 1e-12) {
        v0 -= 0.5;
        v1 += 0.5;
    }
    const double pad = (v1 - v0) * 0.08;
    const double y_lo = v0 - pad, y_hi = v1 + pad;
    const double tspan = std::chrono::duration<double>(t1 - t0).count();
    auto X = [&](Timestamp t) { return L + std::chrono::duration<double>(t - t0).count() / tspan * pw; };
    auto Y = [&](double v) { return T + (y_hi - v) / (y_hi - y_lo) * ph; };

    const auto& first = *traces[0].series;
    const auto unit = std::string(unit_symbol(first.unit()));
    std::string s;
    s += fmt::format(R"svg(<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{0}" height="{1}" viewBox="0 0 {0} {1}" font-family="Helvetica, Arial, sans-serif" font-size="12">
<rect x="0" y="0" width="{0}" height="{1}" fill="#ffffff"/>
<text class="title" x="{2}" y="28" font-size="16" text-anchor="middle">{3}</text>
)svg",
                     W, H, num(W / 2), esc(title));
    s += fmt::format(R"svg(<rect class="plot" x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#333333"/>
)svg",
                     num(L), num(T), num(pw), num(ph));

    const auto yt = nice_ticks(y_lo, y_hi);
    const double ystep = yt.size() > 1 ? yt[1] - yt[0] : 1.0;
    for (double v : yt) {
        s += fmt::format(R"svg(<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="#e5e5e5"/><text class="ytick" x="{3}" y="{4}" text-anchor="end">{5}</text>
)svg",
                         num(L), num(Y(v)), num(L + pw), num(L - 6), num(Y(v) + 4), tick_text(v, ystep));
    }
    const auto xt = time_ticks(t0, t1);
    for (auto t : xt.at) {
        s += fmt::format(R"svg(<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="#e5e5e5"/><text class="xtick" x="{0}" y="{3}" text-anchor="middle">{4}</text>
)svg",
                         num(X(t)), num(T), num(T + ph), num(T + ph + 18), time_label(t, xt.label_kind));
    }
    s += fmt::format(R"svg(<text class="xlabel" x="{}" y="{}" text-anchor="middle">Time (UTC)</text>
<text class="ylabel" transform="translate(18 {}) rotate(-90)" text-anchor="middle">{}</text>
)svg",
                     num(L + pw / 2), num(H - 18), num(T + ph / 2), esc(axis_label(first)));

    for (std::size_t k = 0; k < traces.size(); ++k) {
        const auto& tr = traces[k];
        const auto& ser = *tr.series;
        const auto color = kTraceColors[k];
        std::string pts;
        auto flush = [&] {
            if (!pts.empty()) s += fmt::format(R"svg(<polyline class="trace" data-trace="{}" fill="none" stroke="{}" stroke-width="1.2" points="{}"/>
)svg",
                                               k, color, pts);
            pts.clear();
        };
        for (std::size_t i = 0; i < ser.size(); ++i) {
            if (!ser.valid(i)) {
                flush();
                continue;
            }
            if (!pts.empty()) pts += ' ';
            pts += num(X(ser.timestamps()[i])) + "," + num(Y(ser.values()[i]));
        }
        flush();
        if (ser.valid_count() == 1) {
            auto i = static_cast<std::size_t>(std::find(ser.valid_mask().begin(), ser.valid_mask().end(), 1) - ser.valid_mask().begin());
            s += fmt::format(R"svg(<circle cx="{}" cy="{}" r="2" fill="{}"/>
)svg",
                             num(X(ser.timestamps()[i])), num(Y(ser.values()[i])), color);
        }

        const auto& st = tr.stats;
        const double ym = Y(st.mean);
        s += fmt::format(R"svg(<line class="mean" x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="{3}" stroke-dasharray="6 4"/>
)svg",
                         num(L), num(ym), num(L + pw), color);
        const std::string prefix = traces.size() > 1 ? tr.label + " " : "";
        auto annot = [&](const char* cls, const char* word, double v, std::optional<Timestamp> at, double dy) {
            const double x = at ? X(*at) : L + pw - 4;
            const double y = Y(v) + dy;
            const char* anchor = at ? (x > L + pw * 0.6 ? "end" : "start") : "end";
            const std::string when = at ? " (" + format_minute(*at) + ")" : "";
            s += fmt::format(R"svg(<text class="{}" data-trace="{}" data-value="{}" x="{}" y="{}" text-anchor="{}" fill="{}">{}{} {} {}{}</text>
)svg",
                             cls, k, format_fixed(v, 2), num(x + (at ? (anchor[0] == 'e' ? -6 : 6) : 0)), num(y), anchor, color, esc(prefix),
                             word, format_fixed(v, 2), esc(unit), when);
        };
        const double stagger = traces.size() > 1 ? 14.0 * static_cast<double>(k) : 0.0;
        s += fmt::format(R"svg(<path class="marker-max" data-trace="{}" d="M{} {} l-5 -8 h10 z" fill="{}"/>
<path class="marker-min" data-trace="{}" d="M{} {} l-5 8 h10 z" fill="{}"/>
)svg",
                         k, num(X(st.argmax_time)), num(Y(st.max)), color, k, num(X(st.argmin_time)), num(Y(st.min)), color);
        annot("annot-max", "max", st.max, st.argmax_time, -12 - stagger);
        annot("annot-min", "min", st.min, st.argmin_time, 22 + stagger);
        annot("annot-mean", "mean", st.mean, std::nullopt, -5 - stagger);
    }

    if (traces.size() > 1) {
        double ly = T + 14;
        for (std::size_t k = 0; k < traces.size(); ++k, ly += 16)
            s += fmt::format(R"svg(<g class="legend"><line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="{3}" stroke-width="2"/><text x="{4}" y="{5}">{6}</text></g>
)svg",
                             num(L + 10), num(ly), num(L + 34), kTraceColors[k], num(L + 40), num(ly + 4), esc(traces[k].label));
    }
    s += "</svg>\n";
    return s;
}

std::string timeseries_alt_text(const std::vector<Trace>& traces, const std::string& title) {
    std::string out = title + ".";
    for (const auto& tr : traces) {
        const auto u = std::string(unit_symbol(tr.series->unit()));
        const auto datum = tr.series->datum() ? " " + *tr.series->datum() : std::string();
        out += fmt::format(" {}: max {} {}{} at {}, min {} {}{} at {}, mean {} {}{}.", tr.label, format_fixed(tr.stats.max, 2), u, datum,
                           format_minute(tr.stats.argmax_time), format_fixed(tr.stats.min, 2), u, datum,
                           format_minute(tr.stats.argmin_time), format_fixed(tr.stats.mean, 2), u, datum);
    }
    return out;
}

// ---- map ----

std::string map_svg(const GridSlice& g, Colormap cmap, const std::string& title) {
    const auto gs = grid_stats(g);  // throws FullyMasked
    double lo = gs.min, hi = gs.max;
    if (hi - lo < 1e-12) {
        lo -= 0.5;
        hi += 0.5;
    }
    const std::size_t rows = g.rows(), cols = g.cols();
    const double dlat = rows > 1 ? (g.lats().back() - g.lats().front()) / static_cast<double>(rows - 1) : 0.05;
    const double dlon = cols > 1 ? (g.lons().back() - g.lons().front()) / static_cast<double>(cols - 1) : 0.05;
    const double lat0 = g.lats().front() - dlat / 2, lat1 = g.lats().back() + dlat / 2;
    const double lon0 = g.lons().front() - dlon / 2, lon1 = g.lons().back() + dlon / 2;

    constexpr double L = 70, T = 50, maxw = 640, maxh = 480;
    const double scale = std::min(maxw / (lon1 - lon0), maxh / (lat1 - lat0));
    const double pw = (lon1 - lon0) * scale, ph = (lat1 - lat0) * scale;
    const double cbx = L + pw + 30, cbw = 18;
    const double W = cbx + cbw + 70, H = T + ph + 60;
    auto X = [&](double lon) { return L + (lon - lon0) * scale; };
    auto Y = [&](double lat) { return T + (lat1 - lat) * scale; };
    auto level = [&](double v) { return std::clamp(static_cast<int>(std::floor((v - lo) / (hi - lo) * kLevels)), 0, kLevels - 1); };

    std::string s;
    s += fmt::format(R"svg(<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{0}" height="{1}" viewBox="0 0 {0} {1}" font-family="Helvetica, Arial, sans-serif" font-size="12">
<style>.m{{fill:{2}}})svg",
                     num(W), num(H), kMaskFill);
    for (int k = 0; k < kLevels; ++k)
        s += fmt::format(".{}{{fill:{}}}", level_class(k), colormap_hex(cmap, (k + 0.5) / kLevels));
    s += "</style>\n";
    s += fmt::format(R"svg(<rect x="0" y="0" width="{0}" height="{1}" fill="#ffffff"/>
<text class="title" x="{2}" y="28" font-size="16" text-anchor="middle">{3}</text>
)svg",
                     num(W), num(H), num(W / 2), esc(title));

    // cells in index units, row 0 at the top (northernmost)
    s += fmt::format(R"svg(<g class="cells" shape-rendering="crispEdges" transform="translate({} {}) scale({} {})">
)svg",
                     num(L), num(T), fmt::format("{:.6f}", pw / static_cast<double>(cols)), fmt::format("{:.6f}", ph / static_cast<double>(rows)));
    for (std::size_t vr = 0; vr < rows; ++vr) {
        const std::size_t r = rows - 1 - vr;
        std::size_t c = 0;
        while (c < cols) {
            const bool ok = g.valid(r, c);
            const std::string cls = ok ? level_class(level(g.value(r, c))) : "m";
            std::size_t e = c + 1;
            while (e < cols && g.valid(r, e) == ok && (ok ? level_class(level(g.value(r, e))) : "m") == cls) ++e;
            s += fmt::format(R"svg(<rect class="{}" x="{}" y="{}" width="{}" height="1"/>)svg", cls, c, vr, e - c);
            c = e;
        }
        s += '\n';
    }
    s += "</g>\n";
    s += fmt::format(R"svg(<rect class="frame" x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#333333"/>
)svg",
                     num(L), num(T), num(pw), num(ph));

    auto deg = [](double v, char pos, char neg) {
        return fmt::format("{}°{}", format_fixed(std::abs(v), std::abs(v - std::round(v)) < 1e-9 ? 0 : 1), v < 0 ? neg : pos);
    };
    for (double v : nice_ticks(lon0, lon1, 6))
        s += fmt::format(R"svg(<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="#333333"/><text class="xtick" x="{0}" y="{3}" text-anchor="middle">{4}</text>
)svg",
                         num(X(v)), num(T + ph), num(T + ph + 5), num(T + ph + 19), deg(v, 'E', 'W'));
    for (double v : nice_ticks(lat0, lat1, 6))
        s += fmt::format(R"svg(<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="#333333"/><text class="ytick" x="{3}" y="{4}" text-anchor="end">{5}</text>
)svg",
                         num(L - 5), num(Y(v)), num(L), num(L - 8), num(Y(v) + 4), deg(v, 'N', 'S'));
    s += fmt::format(R"svg(<text class="xlabel" x="{}" y="{}" text-anchor="middle">Longitude</text>
<text class="ylabel" transform="translate(16 {}) rotate(-90)" text-anchor="middle">Latitude</text>
)svg",
                     num(L + pw / 2), num(T + ph + 40), num(T + ph / 2));

    // colorbar, bottom = lo
    const double lh = ph / kLevels;
    s += "<g class=\"colorbar\" shape-rendering=\"crispEdges\">";
    for (int k = 0; k < kLevels; ++k)
        s += fmt::format(R"svg(<rect class="{}" x="{}" y="{}" width="{}" height="{}"/>)svg", level_class(k), num(cbx),
                         fmt::format("{:.3f}", T + ph - (k + 1) * lh), num(cbw), fmt::format("{:.3f}", lh + 0.05));
    s += "</g>\n";
    const auto unit = std::string(unit_symbol(g.unit()));
    s += fmt::format(R"svg(<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#333333"/>
<text class="cbar-max" data-value="{}" x="{}" y="{}">{}</text>
<text class="cbar-min" data-value="{}" x="{}" y="{}">{}</text>
<text class="cbar-unit" x="{}" y="{}" text-anchor="middle">{}</text>
)svg",
                     num(cbx), num(T), num(cbw), num(ph), format_fixed(hi, 2), num(cbx + cbw + 5), num(T + 4), format_fixed(hi, 2),
                     format_fixed(lo, 2), num(cbx + cbw + 5), num(T + ph + 4), format_fixed(lo, 2), num(cbx + cbw / 2), num(T - 8), esc(unit));
    for (double v : nice_ticks(lo, hi, 5)) {
        const double y = T + (hi - v) / (hi - lo) * ph;
        if (y < T + 14 || y > T + ph - 14) continue;
        s += fmt::format(R"svg(<text class="cbar-tick" x="{}" y="{}">{}</text>
)svg",
                         num(cbx + cbw + 5), num(y + 4), format_fixed(v, 2));
    }
    if (gs.masked_count > 0)
        s += fmt::format(R"svg(<rect x="{}" y="{}" width="12" height="12" fill="{}" stroke="#333333"/><text x="{}" y="{}">masked / land</text>
)svg",
                         num(L), num(T + ph + 46), kMaskFill, num(L + 16), num(T + ph + 56));
    s += "</svg>\n";
    return s;
}

std::string map_alt_text(const GridSlice& g, const std::string& title) {
    const auto gs = grid_stats(g);
    const auto u = std::string(unit_symbol(g.unit()));
    return fmt::format("{}. Map of {} cells ({} masked) for {}; min {} {} at ({:.3f}, {:.3f}), max {} {} at ({:.3f}, {:.3f}).", title,
                       g.cell_count(), gs.masked_count, format_date(g.timestamp()), format_fixed(gs.min, 2), u, gs.argmin.lat,
                       gs.argmin.lon, format_fixed(gs.max, 2), u, gs.argmax.lat, gs.argmax.lon);
}

// ---- store ----

namespace {

void write_atomic(const std::filesystem::path& path, std::string_view bytes) {
    auto tmp = path;
    tmp += fmt::format(".tmp{}", std::hash<std::thread::id>{}(std::this_thread::get_id()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw Error(ErrorCode::Internal, "cannot write " + tmp.string(), {{"path", tmp.string()}});
    }
    std::filesystem::rename(tmp, path);
}

nlohmann::json read_manifest(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) return nlohmann::json::object();
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigError, "corrupt figure manifest: " + std::string(e.what()), {{"path", (dir / "manifest.json").string()}});
    }
}

}  // namespace

FigureStore::FigureStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    if (dir_.empty()) throw Error(ErrorCode::ConfigError, "figure store needs a directory", {{"field", "figure_dir"}});
    std::filesystem::create_directories(dir_);
}

bool FigureStore::is_hash(std::string_view s) noexcept {
    return s.size() == 64 && std::all_of(s.begin(), s.end(), [](char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'); });
}

FigureRef FigureStore::put(const std::string& svg, const std::string& alt_text, FigureKind kind) {
    FigureRef ref{sha256_hex(svg), "", alt_text, kind};
    ref.path = ref.hash + ".svg";
    std::lock_guard lock(mu_);
    const auto file = dir_ / ref.path;
    if (!std::filesystem::exists(file)) write_atomic(file, svg);
    auto manifest = read_manifest(dir_);
    const nlohmann::json entry = {{"alt_text", alt_text}, {"kind", kind == FigureKind::Map ? "Map" : "TimeSeries"}};
    if (!manifest.contains(ref.hash) || manifest[ref.hash] != entry) {
        manifest[ref.hash] = entry;
        write_atomic(dir_ / "manifest.json", manifest.dump(1) + "\n");
    }
    return ref;
}

std::optional<std::string> FigureStore::read(const std::string& hash) const {
    if (!is_hash(hash)) return std::nullopt;
    std::ifstream in(dir_ / (hash + ".svg"), std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::optional<FigureRef> FigureStore::find(const std::string& hash) const {
    if (!is_hash(hash)) return std::nullopt;
    std::lock_guard lock(mu_);
    auto manifest = read_manifest(dir_);
    if (!manifest.contains(hash) || !std::filesystem::exists(dir_ / (hash + ".svg"))) return std::nullopt;
    const auto& e = manifest[hash];
    return FigureRef{hash, hash + ".svg", e.value("alt_text", ""), e.value("kind", "") == "Map" ? FigureKind::Map : FigureKind::TimeSeries};
}

FigureRef render_timeseries(FigureStore& store, const std::vector<Trace>& traces, const std::string& title) {
    auto svg = timeseries_svg(traces, title);
    return store.put(svg, timeseries_alt_text(traces, title), FigureKind::TimeSeries);
}

FigureRef render_map(FigureStore& store, const GridSlice& g, Colormap cmap, const std::string& title) {
    auto svg = map_svg(g, cmap, title);
    return store.put(svg, map_alt_text(g, title), FigureKind::Map);
}

}  // namespace oceanqa
