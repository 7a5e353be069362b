#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace chaintag {

// Seconds since the Unix epoch, UTC.
using UnixTime = std::int64_t;

constexpr std::int64_t kSecondsPerDay = 86400;

struct CivilTime {
    int year = 1970;
    unsigned month = 1;   // 1..12
    unsigned day = 1;     // 1..31
    unsigned hour = 0;
    unsigned minute = 0;
    unsigned second = 0;
    unsigned weekday = 4;  // 0 = Sunday
};

std::int64_t days_from_civil(int year, unsigned month, unsigned day);
UnixTime to_unix(const CivilTime& c);
CivilTime to_civil(UnixTime t);
unsigned days_in_month(int year, unsigned month);

// Strict "YYYY-MM-DDTHH:MM:SSZ".
std::optional<UnixTime> parse_iso_utc(std::string_view text);
std::string format_iso_utc(UnixTime t);

// Half-open interval [begin, end) of a time literal: "YYYY", "YYYY-MM", "YYYY-MM-DD"
// or a full timestamp (one-second interval).
struct TimeRange {
    UnixTime begin;
    UnixTime end;
};
std::optional<TimeRange> parse_time_range(std::string_view text);

// floor((later - earlier) / 86400)
std::int64_t date_diff_days(UnixTime later, UnixTime earlier);

}  // namespace chaintag
