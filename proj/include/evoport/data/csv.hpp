#pragma once

#include <string>
#include <vector>

namespace evoport::data {

// Minimal CSV support for the project's own file formats: comma-separated,
// no quoting, '#' comments and blank lines skipped, decimal-point numbers,
// ISO-8601 dates. Throws ParseError (with file:line) on malformed input
// and DataError when the file cannot be opened.
struct CsvTable {
    std::string path;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> row_lines; // 1-based source line per row

    std::size_t column(const std::string& name) const; // throws ParseError if absent
};

CsvTable read_csv(const std::string& path);

void write_lines(const std::string& path, const std::vector<std::string>& lines);

} // namespace evoport::data
