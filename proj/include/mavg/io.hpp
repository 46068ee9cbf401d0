#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mavg/spectroscopy.hpp"

namespace mavg::io {

// 17 significant digits; NaN is written as `nan`.
std::string format_double(double v);
double parse_double(const std::string& token);

// Map CSV: `#` comment lines, then a header row (corner label followed by the
// probe detunings) and one row per second-axis value.
void write_map_csv(std::ostream& os, const TransmissionMap& map,
                   const std::vector<std::string>& comments);

struct CsvMap {
  std::vector<double> probe_axis;
  std::vector<double> second_axis;
  std::vector<double> values;  // row-major
};
CsvMap read_map_csv(std::istream& is);

// Plain column table with a header row.
void write_table_csv(std::ostream& os, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& columns,
                     const std::vector<std::string>& comments);

// Binary 8-bit PGM, first image row = first map row; [0, 1] -> [0, 255].
void write_pgm(std::ostream& os, const TransmissionMap& map);

void write_file(const std::string& path, const std::string& content);

}  // namespace mavg::io
