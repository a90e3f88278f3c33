#include "evoport/date.hpp"

#include "evoport/errors.hpp"

#include <charconv>
#include <cstdio>

namespace evoport {

std::int32_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<int>(doe) - 719468;
}

void civil_from_days(std::int32_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const int era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<int>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
}

Date parse_date(std::string_view text) {
    int y = 0;
    unsigned m = 0, d = 0;
    if (text.size() != 10 || text[4] != '-' || text[7] != '-')
        throw ParseError("invalid date '" + std::string(text) + "', expected YYYY-MM-DD");
    auto num = [&](std::size_t pos, std::size_t len, auto& out) {
        auto res = std::from_chars(text.data() + pos, text.data() + pos + len, out);
        if (res.ec != std::errc{} || res.ptr != text.data() + pos + len)
            throw ParseError("invalid date '" + std::string(text) + "', expected YYYY-MM-DD");
    };
    num(0, 4, y);
    num(5, 2, m);
    num(8, 2, d);
    if (m < 1 || m > 12 || d < 1 || d > 31)
        throw ParseError("invalid date '" + std::string(text) + "'");
    return Date{days_from_civil(y, m, d)};
}

std::string format_date(Date date) {
    int y;
    unsigned m, d;
    civil_from_days(date.serial, y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", y, m, d);
    return buf;
}

} // namespace evoport
