#include "chaintag/cron.hpp"

#include <charconv>
#include <sstream>
#include <vector>

#include "chaintag/error.hpp"

namespace chaintag {

namespace {

struct FieldSpec {
    const char* name;
    unsigned lo;
    unsigned hi;
};

constexpr FieldSpec kFields[5] = {
    {"minute", 0, 59}, {"hour", 0, 23}, {"day-of-month", 1, 31}, {"month", 1, 12}, {"day-of-week", 0, 7}};

unsigned parse_number(std::string_view text, const FieldSpec& spec) {
    unsigned v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc{} || p != text.data() + text.size())
        throw ValidationError(spec.name, "bad number '" + std::string(text) + "'");
    if (v < spec.lo || v > spec.hi)
        throw ValidationError(spec.name, "value " + std::to_string(v) + " out of range " + std::to_string(spec.lo) +
                                             "-" + std::to_string(spec.hi));
    return v;
}

// Returns the set of values as a bit mask over [0, hi].
std::vector<bool> parse_field(std::string_view field, const FieldSpec& spec) {
    std::vector<bool> bits(spec.hi + 1, false);
    std::size_t start = 0;
    while (start <= field.size()) {
        std::size_t comma = field.find(',', start);
        std::string_view item = field.substr(start, comma == std::string_view::npos ? field.npos : comma - start);
        if (item.empty()) throw ValidationError(spec.name, "empty list element");

        unsigned step = 1;
        std::size_t slash = item.find('/');
        std::string_view range = item.substr(0, slash);
        if (slash != std::string_view::npos) {
            std::string_view step_text = item.substr(slash + 1);
            auto [p, ec] = std::from_chars(step_text.data(), step_text.data() + step_text.size(), step);
            if (step_text.empty() || ec != std::errc{} || p != step_text.data() + step_text.size() || step == 0)
                throw ValidationError(spec.name, "bad step '" + std::string(step_text) + "'");
        }
        unsigned lo = spec.lo, hi = spec.hi;
        if (range == "*") {
            if (spec.hi == 7) hi = 6;  // '*' in day-of-week covers 0-6 once
        } else {
            std::size_t dash = range.find('-');
            if (dash == std::string_view::npos) {
                lo = parse_number(range, spec);
                hi = slash == std::string_view::npos ? lo : spec.hi;
            } else {
                lo = parse_number(range.substr(0, dash), spec);
                hi = parse_number(range.substr(dash + 1), spec);
                if (lo > hi) throw ValidationError(spec.name, "descending range '" + std::string(range) + "'");
            }
        }
        for (unsigned v = lo; v <= hi; v += step) bits[v] = true;
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return bits;
}

template <std::size_t N>
void assign(std::bitset<N>& out, const std::vector<bool>& bits) {
    for (std::size_t i = 0; i < bits.size() && i < N; ++i) out[i] = bits[i];
}

}  // namespace

Schedule Schedule::parse(std::string_view expr) {
    std::istringstream in{std::string(expr)};
    std::vector<std::string> fields;
    for (std::string f; in >> f;) fields.push_back(f);
    if (fields.size() != 5)
        throw ValidationError("schedule", "expected 5 fields, got " + std::to_string(fields.size()));

    Schedule s;
    s.expr_ = std::string(expr);
    assign(s.minutes_, parse_field(fields[0], kFields[0]));
    assign(s.hours_, parse_field(fields[1], kFields[1]));
    assign(s.days_of_month_, parse_field(fields[2], kFields[2]));
    assign(s.months_, parse_field(fields[3], kFields[3]));
    auto dow = parse_field(fields[4], kFields[4]);
    if (dow[7]) dow[0] = true;
    assign(s.days_of_week_, dow);
    s.dom_restricted_ = fields[2].front() != '*';
    s.dow_restricted_ = fields[4].front() != '*';
    return s;
}

bool Schedule::day_matches(const CivilTime& c) const {
    bool dom = days_of_month_[c.day];
    bool dow = days_of_week_[c.weekday];
    if (dom_restricted_ && dow_restricted_) return dom || dow;
    return dom && dow;
}

bool Schedule::matches(UnixTime t) const {
    CivilTime c = to_civil(t);
    return c.second == 0 && months_[c.month] && day_matches(c) && hours_[c.hour] && minutes_[c.minute];
}

std::optional<UnixTime> Schedule::next_fire_after(UnixTime t) const {
    UnixTime cur = t - ((t % 60) + 60) % 60 + 60;
    const UnixTime limit = cur + 28LL * 366 * kSecondsPerDay;
    while (cur < limit) {
        CivilTime c = to_civil(cur);
        if (!months_[c.month]) {
            CivilTime n{c.month == 12 ? c.year + 1 : c.year, c.month == 12 ? 1u : c.month + 1, 1};
            cur = to_unix(n);
            continue;
        }
        if (!day_matches(c)) {
            cur = days_from_civil(c.year, c.month, c.day) * kSecondsPerDay + kSecondsPerDay;
            continue;
        }
        if (!hours_[c.hour]) {
            cur = cur - c.minute * 60 + 3600;
            continue;
        }
        if (!minutes_[c.minute]) {
            cur += 60;
            continue;
        }
        return cur;
    }
    return std::nullopt;
}

}  // namespace chaintag
