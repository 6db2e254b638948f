#include "cqed/runner/csv.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "cqed/errors.hpp"

namespace cqed::runner {

std::size_t Series::size() const {
    return std::visit([](const auto& v) { return v.size(); }, values);
}

std::string format_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string format_csv(const std::vector<double>& times, const std::vector<Series>& series) {
    std::string out = "t";
    for (const auto& s : series) {
        if (s.size() != times.size()) {
            throw DimensionError("format_csv: series '" + s.name + "' has " + std::to_string(s.size()) +
                                 " samples, expected " + std::to_string(times.size()));
        }
        if (std::holds_alternative<std::vector<cplx>>(s.values)) {
            out += "," + s.name + "_re," + s.name + "_im";
        } else {
            out += "," + s.name;
        }
    }
    out += '\n';
    for (std::size_t k = 0; k < times.size(); ++k) {
        out += format_number(times[k]);
        for (const auto& s : series) {
            if (const auto* c = std::get_if<std::vector<cplx>>(&s.values)) {
                out += "," + format_number((*c)[k].real()) + "," + format_number((*c)[k].imag());
            } else {
                out += "," + format_number(std::get<std::vector<double>>(s.values)[k]);
            }
        }
        out += '\n';
    }
    return out;
}

std::vector<double> CsvTable::column(const std::string& name) const {
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] != name) continue;
        std::vector<double> col;
        col.reserve(rows.size());
        for (const auto& row : rows) col.push_back(row[j]);
        return col;
    }
    throw std::out_of_range("csv: no column '" + name + "'");
}

CsvTable parse_csv(const std::string& text) {
    CsvTable table;
    std::istringstream in(text);
    std::string line;
    auto split = [](const std::string& l) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(l);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        return cells;
    };
    if (!std::getline(in, line)) throw std::runtime_error("csv: empty input");
    table.header = split(line);
    while (std::getline(in, line)) {
        const auto cells = split(line);
        if (cells.size() != table.header.size()) throw std::runtime_error("csv: ragged row");
        std::vector<double> row;
        for (const auto& c : cells) row.push_back(std::stod(c));
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace cqed::runner
