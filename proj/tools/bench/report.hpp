#pragma once

#include <string>
#include <vector>

namespace umm::bench {

// RFC 4180: quote fields holding a comma, quote or line break; LF endings.
std::string csv_field(const std::string& s);
std::string csv_row(const std::vector<std::string>& fields);

struct Series {
  std::string label;
  std::vector<double> x, y;
};

// Standalone SVG line chart. Points that are non-finite, or non-positive on a
// log axis, are skipped.
std::string line_chart_svg(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                           const std::vector<Series>& series, bool logx, bool logy);

void write_file(const std::string& path, const std::string& contents);

}  // namespace umm::bench
