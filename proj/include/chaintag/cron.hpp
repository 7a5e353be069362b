#pragma once

#include <bitset>
#include <optional>
#include <string>
#include <string_view>

#include "chaintag/time_util.hpp"

namespace chaintag {

// Five-field crontab schedule (minute hour day-of-month month day-of-week), evaluated in UTC.
// Fields accept '*', numbers, ',' lists, 'a-b' ranges and '/n' steps. Day-of-week 0 and 7 are Sunday.
// As in Vixie cron, when both day fields are restricted a day matches if either does.
class Schedule {
public:
    // Throws ValidationError: wrong field count, out-of-range value, bad syntax.
    static Schedule parse(std::string_view expr);

    const std::string& expression() const noexcept { return expr_; }

    // First minute boundary strictly after t that matches, or nullopt if none within 28 years
    // (e.g. "0 0 30 2 *").
    std::optional<UnixTime> next_fire_after(UnixTime t) const;

    bool matches(UnixTime t) const;

private:
    std::string expr_;
    std::bitset<60> minutes_;
    std::bitset<24> hours_;
    std::bitset<32> days_of_month_;
    std::bitset<13> months_;
    std::bitset<7> days_of_week_;
    bool dom_restricted_ = false;
    bool dow_restricted_ = false;

    bool day_matches(const CivilTime& c) const;
};

}  // namespace chaintag
