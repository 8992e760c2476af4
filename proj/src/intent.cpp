// SPDX-License-Identifier: Apache-2.0
#include "oceanqa/intent.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include <fmt/format.h>

#include "oceanqa/error.hpp"
#include "oceanqa/serialization.hpp"
#include "oceanqa/text_util.hpp"

namespace oceanqa {

std::string_view to_string(Stat s) noexcept {
    switch (s) {
        case Stat::Max: return "Max";
        case Stat::Min: return "Min";
        case Stat::Mean: return "Mean";
        case Stat::Std: return "Std";
        case Stat::FullSeries: return "FullSeries";
        case Stat::Trend: return "Trend";
        case Stat::Compare: return "Compare";
    }
    return "FullSeries";
}

std::optional<Stat> stat_from_string(std::string_view s) noexcept {
    for (auto v : {Stat::Max, Stat::Min, Stat::Mean, Stat::Std, Stat::FullSeries, Stat::Trend, Stat::Compare})
        if (to_string(v) == s) return v;
    return std::nullopt;
}

void StructuredQuery::validate() const {
    auto fail = [](std::string_view field, std::string msg) {
        throw Error(ErrorCode::InvalidQuery, std::move(msg), {{"field", std::string(field)}});
    };
    if (selectors.empty() || selectors.size() > 2) fail("selectors", "a query needs one or two locations");
    if (stat == Stat::Compare && selectors.size() != 2) fail("selectors", "Compare requires exactly two locations");
    if (stat != Stat::Compare && selectors.size() != 1)
        fail("selectors", fmt::format("{} takes exactly one location", to_string(stat)));
    if (labels.size() != selectors.size()) fail("labels", "one label per selector is required");
    if (!(time.start < time.end)) fail("time", "time range is empty");
    if (!resolution_allowed(variable, time.resolution))
        fail("time.resolution",
             fmt::format("resolution {} is not offered for {}", to_string(time.resolution), to_string(variable)));
    if (dataset_hint && *dataset_hint != dataset_family(variable))
        fail("dataset_hint", fmt::format("dataset {} does not serve {}", to_string(*dataset_hint), to_string(variable)));
}

nlohmann::json encode(const StructuredQuery& q) {
    nlohmann::json sel = nlohmann::json::array();
    for (const auto& s : q.selectors) sel.push_back(encode(s));
    return {{"variable", to_string(q.variable)},
            {"stat", to_string(q.stat)},
            {"selectors", sel},
            {"labels", q.labels},
            {"time", encode(q.time)},
            {"dataset_hint", q.dataset_hint ? nlohmann::json(to_string(*q.dataset_hint)) : nlohmann::json(nullptr)},
            {"datum", q.datum ? nlohmann::json(*q.datum) : nlohmann::json(nullptr)},
            {"notes", q.notes}};
}

StructuredQuery decode_structured_query(const nlohmann::json& j) {
    auto bad = [](std::string_view field) {
        return Error(ErrorCode::InvalidValue, "bad StructuredQuery field " + std::string(field),
                     {{"field", std::string(field)}});
    };
    if (!j.is_object()) throw bad("query");
    StructuredQuery q;
    try {
        auto v = variable_from_string(j.at("variable").get<std::string>());
        if (!v) throw bad("variable");
        q.variable = *v;
        auto s = stat_from_string(j.at("stat").get<std::string>());
        if (!s) throw bad("stat");
        q.stat = *s;
        for (const auto& sel : j.at("selectors")) q.selectors.push_back(decode_selector(sel));
        q.labels = j.at("labels").get<std::vector<std::string>>();
        q.time = decode_time_range(j.at("time"));
        if (j.contains("dataset_hint") && !j["dataset_hint"].is_null()) {
            auto f = dataset_family_from_string(j["dataset_hint"].get<std::string>());
            if (!f) throw bad("dataset_hint");
            q.dataset_hint = f;
        }
        if (j.contains("datum") && !j["datum"].is_null()) q.datum = j["datum"].get<std::string>();
        if (j.contains("notes")) q.notes = j["notes"].get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidValue, std::string("StructuredQuery: ") + e.what(), {{"field", "query"}});
    }
    return q;
}

namespace {

struct Token {
    std::string lower;
    std::string original;
};

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

std::vector<Token> tokenize_full(std::string_view raw) {
    std::string text;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        // curly apostrophes
        if (i + 2 < raw.size() && raw[i] == '\xE2' && raw[i + 1] == '\x80' && (raw[i + 2] == '\x99' || raw[i + 2] == '\x98')) {
            text += '\'';
            i += 2;
        } else {
            text += raw[i];
        }
    }
    std::vector<Token> out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) out.push_back({to_lower(cur), cur});
        cur.clear();
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        const char prev = i > 0 ? text[i - 1] : ' ';
        const char next = i + 1 < text.size() ? text[i + 1] : ' ';
        if (is_alnum(c)) {
            cur += c;
        } else if ((c == '-' || c == ':') && is_alnum(prev) && is_alnum(next) && !cur.empty()) {
            cur += c;
        } else if (c == '.' && is_digit(prev) && is_digit(next) && !cur.empty()) {
            cur += c;
        } else if (c == '\'' && !cur.empty() && (next == 's' || next == 'S') &&
                   (i + 2 >= text.size() || !is_alnum(text[i + 2]))) {
            flush();
            ++i;
        } else {
            flush();
        }
    }
    flush();
    return out;
}

constexpr std::array<std::string_view, 12> kMonths = {"january", "february", "march",     "april",   "may",      "june",
                                                      "july",    "august",   "september", "october", "november", "december"};

std::optional<unsigned> month_of(std::string_view t) {
    for (unsigned m = 0; m < 12; ++m) {
        if (t == kMonths[m]) return m + 1;
        if (t.size() >= 3 && t.size() < kMonths[m].size() && kMonths[m].substr(0, t.size()) == t && t != "ma" &&
            (t.size() == 3 || t == "sept"))
            return m + 1;
    }
    return std::nullopt;
}

std::optional<int> year_of(std::string_view t) {
    if (t.size() != 4 || !std::all_of(t.begin(), t.end(), is_digit)) return std::nullopt;
    int y = std::stoi(std::string(t));
    if (y < 1800 || y > 2100) return std::nullopt;
    return y;
}

std::optional<unsigned> day_of(std::string_view t) {
    std::string s(t);
    for (auto suffix : {"st", "nd", "rd", "th"})
        if (s.size() > 2 && s.ends_with(suffix)) s.resize(s.size() - 2);
    if (s.empty() || s.size() > 2 || !std::all_of(s.begin(), s.end(), is_digit)) return std::nullopt;
    unsigned d = static_cast<unsigned>(std::stoi(s));
    if (d < 1 || d > 31) return std::nullopt;
    return d;
}

struct Interval {
    Timestamp start;
    Timestamp end;
    std::size_t next;  // first token after the expression
    bool operator==(const Interval& o) const { return start == o.start && end == o.end; }
};

[[noreturn]] void ambiguous(std::string message, std::string token) {
    throw Error(ErrorCode::AmbiguousTime, std::move(message), {{"token", std::move(token)}});
}

Interval whole_day(int y, unsigned m, unsigned d, std::size_t next, std::string_view token) {
    if (!is_valid_date(y, m, d)) ambiguous(fmt::format("'{}' is not a calendar date", token), std::string(token));
    auto s = make_timestamp(y, m, d);
    return {s, end_of_day(s), next};
}

Interval whole_month(int y, unsigned m, std::size_t next) {
    return {make_timestamp(y, m, 1), end_of_day(make_timestamp(y, m, days_in_month(y, m))), next};
}

Interval whole_year(int y, std::size_t next) { return {make_timestamp(y, 1, 1), end_of_day(make_timestamp(y, 12, 31)), next}; }

Timestamp shift_months(Timestamp t, int months) {
    auto c = to_civil(t);
    int total = c.year * 12 + static_cast<int>(c.month) - 1 - months;
    int y = total / 12;
    unsigned m = static_cast<unsigned>(total % 12) + 1;
    unsigned d = std::min(c.day, days_in_month(y, m));
    return make_timestamp(y, m, d, c.hour, c.minute, c.second);
}

std::optional<Interval> atom(std::span<const std::string> t, std::size_t i, Timestamp now) {
    const auto n = t.size();
    const auto& w = t[i];
    auto at = [&](std::size_t k) -> std::string_view { return k < n ? std::string_view(t[k]) : std::string_view(); };

    if (w.size() == 10 && w[4] == '-' && w[7] == '-') {
        auto ts = parse_timestamp(w);
        if (!ts) ambiguous(fmt::format("'{}' is not a calendar date", w), w);
        return Interval{*ts, end_of_day(*ts), i + 1};
    }
    if (auto m = month_of(w)) {
        if (auto y = year_of(at(i + 1))) return whole_month(*y, *m, i + 2);
        if (auto d = day_of(at(i + 1)))
            if (auto y = year_of(at(i + 2))) return whole_day(*y, *m, *d, i + 3, w);
        return std::nullopt;
    }
    if (auto d = day_of(w)) {
        if (auto m = month_of(at(i + 1)))
            if (auto y = year_of(at(i + 2))) return whole_day(*y, *m, *d, i + 3, w);
        return std::nullopt;
    }
    if (auto y = year_of(w)) return whole_year(*y, i + 1);

    const auto today = to_civil(now);
    if (w == "today") return whole_day(today.year, today.month, today.day, i + 1, w);
    if (w == "yesterday") {
        auto c = to_civil(now - std::chrono::days{1});
        return whole_day(c.year, c.month, c.day, i + 1, w);
    }
    if (w == "now" || w == "currently" || w == "current" || w == "latest")
        return Interval{now - std::chrono::hours{24}, now, i + 1};
    if (w == "this" || w == "last" || w == "past") {
        if (at(i + 1) == "year")
            return whole_year(w == "this" ? today.year : today.year - 1, i + 2);
        if (at(i + 1) == "month") {
            if (w == "this") return whole_month(today.year, today.month, i + 2);
            auto c = to_civil(shift_months(make_timestamp(today.year, today.month, 1), 1));
            return whole_month(c.year, c.month, i + 2);
        }
        // "last 30 days", "past 2 years"
        auto count = at(i + 1);
        if (!count.empty() && count.size() <= 4 && std::all_of(count.begin(), count.end(), is_digit)) {
            int k = std::stoi(std::string(count));
            auto unit = at(i + 2);
            if (k >= 1) {
                if (unit == "day" || unit == "days") return Interval{now - std::chrono::days{k}, now, i + 3};
                if (unit == "week" || unit == "weeks") return Interval{now - std::chrono::days{7 * k}, now, i + 3};
                if (unit == "month" || unit == "months") return Interval{shift_months(now, k), now, i + 3};
                if (unit == "year" || unit == "years") return Interval{shift_months(now, 12 * k), now, i + 3};
            }
        }
    }
    return std::nullopt;
}

bool vague_time_word(std::span<const std::string> t, std::size_t i) {
    static const std::array<std::string_view, 10> vague = {"winter",   "summer", "spring", "autumn", "recently",
                                                           "lately",   "soon",   "season", "weekend", "decade"};
    if (std::find(vague.begin(), vague.end(), t[i]) != vague.end()) return true;
    if (t[i] == "fall" && i > 0) {
        const auto& p = t[i - 1];
        return p == "last" || p == "this" || p == "next" || p == "the" || p == "during";
    }
    if (t[i] == "next" && i + 1 < t.size())
        return t[i + 1] == "week" || t[i + 1] == "month" || t[i + 1] == "year";
    if (auto m = month_of(t[i]); m && t[i] != "may" && t[i] != "march") {
        // a month with no year: "in June"
        return !(i + 1 < t.size() && (year_of(t[i + 1]) || day_of(t[i + 1]))) &&
               !(i > 0 && day_of(t[i - 1]) && i + 1 < t.size() && year_of(t[i + 1]));
    }
    return false;
}

bool is_connector(std::string_view w) { return w == "to" || w == "until" || w == "through" || w == "thru" || w == "till"; }

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    for (auto& t : tokenize_full(text)) out.push_back(std::move(t.lower));
    return out;
}

TimeRange resolve_time_expression(std::span<const std::string> t, Timestamp now) {
    std::vector<Interval> found;
    for (std::size_t i = 0; i < t.size();) {
        if (vague_time_word(t, i)) ambiguous(fmt::format("'{}' does not name a definite time window", t[i]), t[i]);
        const bool opener = t[i] == "from" || t[i] == "between" || t[i] == "since";
        const std::size_t first = opener ? i + 1 : i;
        if (first >= t.size()) {
            ++i;
            continue;
        }
        auto a = atom(t, first, now);
        if (!a) {
            ++i;
            continue;
        }
        if (t[i] == "since") {
            found.push_back({a->start, now, a->next});
            i = a->next;
            continue;
        }
        const std::size_t c = a->next;
        const bool joined = c + 1 < t.size() &&
                            (is_connector(t[c]) || (t[i] == "between" && t[c] == "and"));
        if (joined) {
            if (auto b = atom(t, c + 1, now)) {
                if (!(a->start < b->end))
                    ambiguous(fmt::format("range {} to {} ends before it starts", t[first], t[c + 1]), t[c + 1]);
                found.push_back({a->start, b->end, b->next});
                i = b->next;
                continue;
            }
        }
        found.push_back(*a);
        i = a->next;
    }
    if (found.empty()) ambiguous("no time expression found; name a year, month, date or range", "");
    for (const auto& f : found)
        if (!(f == found.front()))
            ambiguous(fmt::format("several time windows mentioned ({} and {})", format_date(found.front().start),
                                  format_date(f.start)),
                      "");
    return {found.front().start, found.front().end, Resolution::Hourly};
}

namespace {

bool has_phrase(const std::vector<std::string>& t, std::string_view phrase) {
    auto words = split(phrase, ' ');
    if (words.size() > t.size()) return false;
    for (std::size_t i = 0; i + words.size() <= t.size(); ++i) {
        bool ok = true;
        for (std::size_t k = 0; k < words.size() && ok; ++k) ok = t[i + k] == words[k];
        if (ok) return true;
    }
    return false;
}

bool has_any(const std::vector<std::string>& t, std::initializer_list<std::string_view> phrases) {
    return std::any_of(phrases.begin(), phrases.end(), [&](auto p) { return has_phrase(t, p); });
}

struct PlaceMatch {
    const GazetteerEntry* entry;
    std::size_t begin;
    std::size_t end;
};

std::vector<PlaceMatch> find_places(const std::vector<std::string>& t, const Gazetteer& gz) {
    std::vector<PlaceMatch> out;
    for (std::size_t i = 0; i < t.size();) {
        bool matched = false;
        for (std::size_t len = std::min(gz.max_name_words(), t.size() - i); len >= 1 && !matched; --len) {
            std::string name;
            for (std::size_t k = 0; k < len; ++k) name += (k ? " " : "") + t[i + k];
            if (const auto* e = gz.lookup(name)) {
                out.push_back({e, i, i + len});
                i += len;
                matched = true;
            }
        }
        if (!matched) ++i;
    }
    return out;
}

bool title_case(std::string_view w) {
    return w.size() >= 2 && std::isupper(static_cast<unsigned char>(w[0])) &&
           std::any_of(w.begin() + 1, w.end(), [](char c) { return std::islower(static_cast<unsigned char>(c)); });
}

/// A capitalized word right after a locative preposition that the gazetteer
/// did not claim.
std::optional<std::string> unresolved_place(const std::vector<Token>& toks, const std::vector<PlaceMatch>& places) {
    auto claimed = [&](std::size_t i) {
        return std::any_of(places.begin(), places.end(), [&](const auto& p) { return i >= p.begin && i < p.end; });
    };
    static const std::array<std::string_view, 9> preps = {"in", "at", "near", "and", "for", "off", "vs", "versus", "around"};
    for (std::size_t i = 1; i < toks.size(); ++i) {
        if (std::find(preps.begin(), preps.end(), toks[i - 1].lower) == preps.end()) continue;
        std::size_t j = i;
        if (toks[j].lower == "the" && j + 1 < toks.size()) ++j;
        if (claimed(j) || !title_case(toks[j].original) || month_of(toks[j].lower)) continue;
        std::string name = toks[j].original;
        for (std::size_t k = j + 1; k < toks.size() && title_case(toks[k].original) && !claimed(k) && !month_of(toks[k].lower); ++k)
            name += " " + toks[k].original;
        return name;
    }
    return std::nullopt;
}

std::optional<std::string> datum_cue(const std::vector<std::string>& t) {
    for (const auto& w : t) {
        if (w == "mllw" || w == "mhhw" || w == "mhw" || w == "mlw" || w == "mtl" || w == "stnd" || w == "msl")
            return to_upper(w);
        if (w == "navd" || w == "navd88") return std::string("NAVD");
    }
    return std::nullopt;
}

int months_spanned(const TimeRange& tr) {
    auto a = to_civil(tr.start), b = to_civil(tr.end);
    return (b.year - a.year) * 12 + static_cast<int>(b.month) - static_cast<int>(a.month) + 1;
}

}  // namespace

StructuredQuery parse_query(std::string_view text, const Gazetteer& gz, Timestamp now) {
    if (trim(text).empty()) throw Error(ErrorCode::InvalidQuery, "query text is empty", {{"field", "text"}});
    const auto toks = tokenize_full(text);
    std::vector<std::string> t;
    for (const auto& k : toks) t.push_back(k.lower);

    const bool cora = has_any(t, {"cora", "reanalysis", "hindcast"});
    const bool sst = has_any(t, {"sst", "sea surface temperature", "temperature", "temperatures", "water temp"});
    const bool sea_level = has_any(t, {"sea level", "sea levels", "ssh", "sea surface height", "monthly mean"});
    const bool water_level = has_any(t, {"water level", "water levels", "tide", "tides", "tidal", "zeta", "surge",
                                         "high water", "flooding"});
    if (!cora && !sst && !sea_level && !water_level)
        throw Error(ErrorCode::UnsupportedIntent, "no supported ocean variable mentioned", {{"stage", "variable"}});
    if (cora && sst && !sea_level && !water_level)
        throw Error(ErrorCode::UnsupportedIntent, "the reanalysis provides water level only", {{"stage", "variable"}});

    // Fixed template order: Trend, then superlatives, then moments.
    std::optional<Stat> stat;
    if (has_any(t, {"trend", "trends", "change rate", "change rates", "rate of change", "rising", "rate"}))
        stat = Stat::Trend;
    else if (has_any(t, {"maximum", "max", "highest", "peak", "largest"}))
        stat = Stat::Max;
    else if (has_any(t, {"minimum", "min", "lowest", "smallest"}))
        stat = Stat::Min;
    else if (has_any(t, {"average", "mean", "avg"}) && !has_phrase(t, "mean sea level") && !has_phrase(t, "monthly mean"))
        stat = Stat::Mean;
    else if (has_any(t, {"standard deviation", "std", "stdev", "variability"}))
        stat = Stat::Std;

    const auto places = find_places(t, gz);
    if (auto missing = unresolved_place(toks, places))
        throw Error(ErrorCode::UnknownLocation, fmt::format("unknown location '{}'", *missing), {{"token", *missing}});
    if (places.empty())
        throw Error(ErrorCode::UnknownLocation, "no known place name in the query", {{"token", nullptr}});
    std::vector<const GazetteerEntry*> entries;
    for (const auto& p : places)
        if (std::find(entries.begin(), entries.end(), p.entry) == entries.end()) entries.push_back(p.entry);
    if (entries.size() > 2)
        throw Error(ErrorCode::UnsupportedIntent, "comparisons are limited to two locations",
                    {{"stage", "location"}, {"count", entries.size()}});

    StructuredQuery q;
    q.time = resolve_time_expression(t, now);

    if (cora && !(sst && !sea_level && !water_level)) {
        q.variable = Variable::CoraZeta;
    } else if (sst) {
        q.variable = Variable::SeaSurfaceTemperature;
    } else if (water_level) {
        q.variable = Variable::WaterLevel;
    } else {
        const bool superlative = stat == Stat::Max || stat == Stat::Min;
        const int months = months_spanned(q.time);
        if (months >= 2 && !superlative) {
            q.variable = Variable::MonthlyMeanSeaLevel;
            q.notes.push_back(fmt::format("'sea level' over {} months read as monthly mean sea level", months));
        } else {
            q.variable = Variable::WaterLevel;
            q.notes.push_back("'sea level' read as observed water level");
        }
    }

    switch (q.variable) {
        case Variable::WaterLevel:
            q.time.resolution =
                has_any(t, {"6-minute", "six-minute", "6 minute", "six minute"}) ? Resolution::SixMinute : Resolution::Hourly;
            q.datum = datum_cue(t);
            break;
        case Variable::MonthlyMeanSeaLevel:
            q.time.resolution = Resolution::Monthly;
            q.datum = datum_cue(t);
            break;
        case Variable::CoraZeta: q.time.resolution = Resolution::Hourly; break;
        case Variable::SeaSurfaceTemperature: {
            q.time.resolution = Resolution::Daily;
            auto day = start_of_day(q.time.end);
            if (day != start_of_day(q.time.start))
                q.notes.push_back(fmt::format("daily SST map drawn for the last day of the requested window, {}",
                                              format_date(day)));
            q.time.start = day;
            q.time.end = end_of_day(day);
            break;
        }
    }
    q.dataset_hint = dataset_family(q.variable);
    q.stat = entries.size() == 2 ? Stat::Compare : stat.value_or(Stat::FullSeries);

    for (const auto* e : entries) {
        const bool station = e->kind == GazetteerEntry::Kind::Station;
        switch (q.variable) {
            case Variable::WaterLevel:
            case Variable::MonthlyMeanSeaLevel:
                if (!station)
                    throw Error(ErrorCode::UnsupportedIntent,
                                fmt::format("{} is a region; tide gauge records need a station", e->label),
                                {{"stage", "location"}, {"token", e->label}});
                q.selectors.emplace_back(StationRef{e->station.id});
                break;
            case Variable::CoraZeta: q.selectors.emplace_back(e->center); break;
            case Variable::SeaSurfaceTemperature:
                if (station)
                    q.selectors.emplace_back(
                        BBox{e->center.lat - 0.5, e->center.lat + 0.5, e->center.lon - 0.5, e->center.lon + 0.5});
                else
                    q.selectors.emplace_back(NamedRegion{e->region_key});
                break;
        }
        q.labels.push_back(e->label);
    }
    q.validate();
    return q;
}

}  // namespace oceanqa
