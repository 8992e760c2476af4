// SPDX-License-Identifier: Apache-2.0
#include "oceanqa/time.hpp"

#include <cctype>
#include <charconv>

#include <fmt/format.h>

namespace oceanqa {

namespace chr = std::chrono;

Timestamp make_timestamp(int year, unsigned month, unsigned day, int hour, int minute, int second) {
    const chr::sys_days days{chr::year{year} / chr::month{month} / chr::day{day}};
    return Timestamp{days} + chr::hours{hour} + chr::minutes{minute} + chr::seconds{second};
}

CivilTime to_civil(Timestamp ts) {
    const auto days = chr::floor<chr::days>(ts);
    const chr::year_month_day ymd{days};
    chr::hh_mm_ss hms{ts - days};
    return {int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day()), int(hms.hours().count()),
            int(hms.minutes().count()), int(hms.seconds().count())};
}

unsigned days_in_month(int year, unsigned month) {
    return unsigned(chr::year_month_day_last{chr::year{year} / chr::month{month} / chr::last}.day());
}

bool is_valid_date(int year, unsigned month, unsigned day) {
    return chr::year_month_day{chr::year{year}, chr::month{month}, chr::day{day}}.ok() && year >= 1 &&
           year <= 9999;
}

namespace {

bool read_int(std::string_view text, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > text.size()) return false;
    for (std::size_t i = pos; i < pos + len; ++i)
        if (!std::isdigit(static_cast<unsigned char>(text[i]))) return false;
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, out);
    return ec == std::errc{} && ptr == text.data() + pos + len;
}

struct DatePart {
    int year = 0, month = 0, day = 0;
    std::size_t consumed = 0;
};

std::optional<DatePart> parse_date_part(std::string_view text) {
    DatePart d;
    if (text.size() >= 10 && text[4] == '-' && text[7] == '-') {
        if (!read_int(text, 0, 4, d.year) || !read_int(text, 5, 2, d.month) || !read_int(text, 8, 2, d.day))
            return std::nullopt;
        d.consumed = 10;
    } else if (text.size() >= 8) {
        if (!read_int(text, 0, 4, d.year) || !read_int(text, 4, 2, d.month) || !read_int(text, 6, 2, d.day))
            return std::nullopt;
        d.consumed = 8;
    } else {
        return std::nullopt;
    }
    if (d.month < 1 || d.month > 12 || !is_valid_date(d.year, unsigned(d.month), unsigned(d.day)))
        return std::nullopt;
    return d;
}

}  // namespace

bool is_date_only(std::string_view text) {
    auto d = parse_date_part(text);
    return d && d->consumed == text.size();
}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
    auto date = parse_date_part(text);
    if (!date) return std::nullopt;
    std::size_t pos = date->consumed;
    int hour = 0, minute = 0, second = 0, offset_minutes = 0;
    if (pos < text.size()) {
        if (text[pos] != 'T' && text[pos] != ' ') return std::nullopt;
        ++pos;
        if (!read_int(text, pos, 2, hour) || pos + 2 >= text.size() || text[pos + 2] != ':' ||
            !read_int(text, pos + 3, 2, minute))
            return std::nullopt;
        pos += 5;
        if (pos < text.size() && text[pos] == ':') {
            if (!read_int(text, pos + 1, 2, second)) return std::nullopt;
            pos += 3;
        }
        if (hour > 23 || minute > 59 || second > 59) return std::nullopt;
        if (pos < text.size()) {
            const char tz = text[pos];
            if (tz == 'Z' && pos + 1 == text.size()) {
                pos += 1;
            } else if ((tz == '+' || tz == '-') && text.size() == pos + 6 && text[pos + 3] == ':') {
                int oh = 0, om = 0;
                if (!read_int(text, pos + 1, 2, oh) || !read_int(text, pos + 4, 2, om) || oh > 23 || om > 59)
                    return std::nullopt;
                offset_minutes = (tz == '+' ? 1 : -1) * (oh * 60 + om);
                pos += 6;
            } else {
                return std::nullopt;
            }
        }
    }
    if (pos != text.size()) return std::nullopt;
    return make_timestamp(date->year, unsigned(date->month), unsigned(date->day), hour, minute, second) -
           chr::minutes{offset_minutes};
}

std::string format_iso(Timestamp ts) {
    auto c = to_civil(ts);
    return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}Z", c.year, c.month, c.day, c.hour, c.minute,
                       c.second);
}

std::string format_date(Timestamp ts) {
    auto c = to_civil(ts);
    return fmt::format("{:04d}-{:02d}-{:02d}", c.year, c.month, c.day);
}

std::string format_minute(Timestamp ts) {
    auto c = to_civil(ts);
    return fmt::format("{:04d}-{:02d}-{:02d} {:02d}:{:02d}", c.year, c.month, c.day, c.hour, c.minute);
}

Timestamp start_of_day(Timestamp ts) { return Timestamp{chr::floor<chr::days>(ts)}; }

Timestamp end_of_day(Timestamp ts) { return start_of_day(ts) + chr::hours{23} + chr::minutes{59}; }

}  // namespace oceanqa
