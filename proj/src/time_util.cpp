#include "chaintag/time_util.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

namespace chaintag {

namespace chr = std::chrono;

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

bool read_uint(std::string_view s, std::size_t pos, std::size_t len, unsigned& out) {
    if (pos + len > s.size()) return false;
    for (std::size_t i = pos; i < pos + len; ++i)
        if (s[i] < '0' || s[i] > '9') return false;
    auto [p, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, out);
    return ec == std::errc{} && p == s.data() + pos + len;
}

bool valid_date(int y, unsigned m, unsigned d) {
    return chr::year_month_day{chr::year{y}, chr::month{m}, chr::day{d}}.ok();
}

}  // namespace

std::int64_t days_from_civil(int year, unsigned month, unsigned day) {
    chr::sys_days days{chr::year{year} / chr::month{month} / chr::day{day}};
    return days.time_since_epoch().count();
}

unsigned days_in_month(int year, unsigned month) {
    chr::year_month_day_last last{chr::year{year}, chr::month_day_last{chr::month{month}}};
    return static_cast<unsigned>(last.day());
}

UnixTime to_unix(const CivilTime& c) {
    return days_from_civil(c.year, c.month, c.day) * kSecondsPerDay + c.hour * 3600 + c.minute * 60 +
           c.second;
}

CivilTime to_civil(UnixTime t) {
    std::int64_t days = floor_div(t, kSecondsPerDay);
    std::int64_t secs = t - days * kSecondsPerDay;
    chr::sys_days sd{chr::days{days}};
    chr::year_month_day ymd{sd};
    CivilTime c;
    c.year = static_cast<int>(ymd.year());
    c.month = static_cast<unsigned>(ymd.month());
    c.day = static_cast<unsigned>(ymd.day());
    c.hour = static_cast<unsigned>(secs / 3600);
    c.minute = static_cast<unsigned>((secs % 3600) / 60);
    c.second = static_cast<unsigned>(secs % 60);
    c.weekday = chr::weekday{sd}.c_encoding();
    return c;
}

std::optional<UnixTime> parse_iso_utc(std::string_view s) {
    auto range = parse_time_range(s);
    if (!range || s.size() != 20) return std::nullopt;
    return range->begin;
}

std::string format_iso_utc(UnixTime t) {
    CivilTime c = to_civil(t);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02u:%02u:%02uZ", c.year, c.month, c.day, c.hour,
                  c.minute, c.second);
    return buf;
}

std::optional<TimeRange> parse_time_range(std::string_view s) {
    unsigned year = 0, month = 1, day = 1, hour = 0, minute = 0, second = 0;
    if (!read_uint(s, 0, 4, year)) return std::nullopt;
    int y = static_cast<int>(year);
    if (s.size() == 4) {
        UnixTime b = days_from_civil(y, 1, 1) * kSecondsPerDay;
        return TimeRange{b, days_from_civil(y + 1, 1, 1) * kSecondsPerDay};
    }
    if (s.size() < 7 || s[4] != '-' || !read_uint(s, 5, 2, month) || month < 1 || month > 12)
        return std::nullopt;
    if (s.size() == 7) {
        UnixTime b = days_from_civil(y, month, 1) * kSecondsPerDay;
        UnixTime e = month == 12 ? days_from_civil(y + 1, 1, 1) : days_from_civil(y, month + 1, 1);
        return TimeRange{b, e * kSecondsPerDay};
    }
    if (s.size() < 10 || s[7] != '-' || !read_uint(s, 8, 2, day) || !valid_date(y, month, day))
        return std::nullopt;
    UnixTime day_start = days_from_civil(y, month, day) * kSecondsPerDay;
    if (s.size() == 10) return TimeRange{day_start, day_start + kSecondsPerDay};
    if (s.size() != 20 || s[10] != 'T' || s[13] != ':' || s[16] != ':' || s[19] != 'Z') return std::nullopt;
    if (!read_uint(s, 11, 2, hour) || !read_uint(s, 14, 2, minute) || !read_uint(s, 17, 2, second))
        return std::nullopt;
    if (hour > 23 || minute > 59 || second > 59) return std::nullopt;
    UnixTime t = day_start + hour * 3600 + minute * 60 + second;
    return TimeRange{t, t + 1};
}

std::int64_t date_diff_days(UnixTime later, UnixTime earlier) {
    return floor_div(later - earlier, kSecondsPerDay);
}

}  // namespace chaintag
