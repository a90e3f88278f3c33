#include "evoport/data/csv.hpp"

#include "evoport/errors.hpp"
#include "evoport/text.hpp"

#include <fstream>

namespace evoport::data {

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name)
            return i;
    throw ParseError(path, 1, "missing required column '" + name + "'");
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open '" + path + "'");

    CsvTable table;
    table.path = path;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = trim(line);
        if (view.empty() || view.front() == '#')
            continue;
        std::vector<std::string> fields;
        for (auto f : split(view, ','))
            fields.emplace_back(trim(f));
        if (table.header.empty()) {
            table.header = std::move(fields);
            continue;
        }
        if (fields.size() != table.header.size())
            throw ParseError(path, line_no,
                             "expected " + std::to_string(table.header.size()) + " fields, got " +
                                 std::to_string(fields.size()));
        table.rows.push_back(std::move(fields));
        table.row_lines.push_back(line_no);
    }
    if (table.header.empty())
        throw DataError("'" + path + "' is empty");
    return table;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw DataError("cannot write '" + path + "'");
    for (const auto& l : lines)
        out << l << '\n';
    if (!out)
        throw DataError("write failed for '" + path + "'");
}

} // namespace evoport::data
