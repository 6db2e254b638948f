#pragma once

#include <string>
#include <variant>
#include <vector>

#include "cqed/qstate.hpp"

namespace cqed::runner {

struct Series {
    std::string name;
    std::variant<std::vector<double>, std::vector<cplx>> values;

    std::size_t size() const;
};

/// Header "t,<names...>" with complex series split into name_re, name_im;
/// one row per time; every number printed with 17 significant digits; LF only.
std::string format_csv(const std::vector<double>& times, const std::vector<Series>& series);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::vector<double> column(const std::string& name) const;
};

CsvTable parse_csv(const std::string& text);

std::string format_number(double x);

}  // namespace cqed::runner
