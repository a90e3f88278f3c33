#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace evoport {

// Shortest round-trip decimal representation (std::to_chars), locale
// independent. Used for every number we write to CSV/JSON so that reruns
// produce byte-identical files.
std::string fmt_double(double value);

std::string fmt_double_fixed(double value, int precision);

// Locale-independent strtod via std::from_chars; throws ParseError on
// trailing garbage or empty input.
double parse_double(std::string_view text);

long long parse_int(std::string_view text);

std::vector<std::string_view> split(std::string_view line, char sep);

std::string_view trim(std::string_view s);

} // namespace evoport
