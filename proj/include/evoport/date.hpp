#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace evoport {

// Calendar date stored as days since 1970-01-01 (proleptic Gregorian).
// Cheap to copy and compare; trading-day arithmetic is done by calendar
// index, not by Date, so this type only needs total ordering and ISO-8601
// conversion.
struct Date {
    std::int32_t serial = 0;

    auto operator<=>(const Date&) const = default;
};

// Parses "YYYY-MM-DD"; throws evoport::ParseError on anything else.
Date parse_date(std::string_view text);

std::string format_date(Date d);

// Civil <-> serial conversions (Howard Hinnant's algorithms).
std::int32_t days_from_civil(int y, unsigned m, unsigned d);
void civil_from_days(std::int32_t z, int& y, unsigned& m, unsigned& d);

inline Date make_date(int y, unsigned m, unsigned d) {
    return Date{days_from_civil(y, m, d)};
}

} // namespace evoport
