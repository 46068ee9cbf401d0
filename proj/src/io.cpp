#include "mavg/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mavg::io {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& token) {
  if (token == "nan") return std::numeric_limits<double>::quiet_NaN();
  // strtod rather than stod: subnormals parse with ERANGE but are exact.
  const char* begin = token.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (token.empty() || end != begin + token.size() || (errno == ERANGE && std::isinf(v)))
    throw std::invalid_argument("bad number '" + token + "'");
  return v;
}

namespace {

void write_comments(std::ostream& os, const std::vector<std::string>& comments) {
  for (const auto& c : comments) os << "# " << c << "\n";
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  return out;
}

}  // namespace

void write_map_csv(std::ostream& os, const TransmissionMap& map,
                   const std::vector<std::string>& comments) {
  write_comments(os, comments);
  os << (map.grid.axis_kind == AxisKind::DriveAmplitude ? "omega_rabi" : "omega_d")
     << "\\d_omega_r";
  for (double x : map.grid.probe_axis) os << ',' << format_double(x);
  os << "\n";
  for (std::size_t r = 0; r < map.rows(); ++r) {
    os << format_double(map.grid.second_axis[r]);
    for (double v : map.row(r)) os << ',' << format_double(v);
    os << "\n";
  }
}

CsvMap read_map_csv(std::istream& is) {
  CsvMap m;
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split(line);
    if (!header) {
      for (std::size_t i = 1; i < cells.size(); ++i) m.probe_axis.push_back(parse_double(cells[i]));
      header = true;
      continue;
    }
    if (cells.size() != m.probe_axis.size() + 1)
      throw std::runtime_error("map csv: ragged row");
    m.second_axis.push_back(parse_double(cells[0]));
    for (std::size_t i = 1; i < cells.size(); ++i) m.values.push_back(parse_double(cells[i]));
  }
  return m;
}

void write_table_csv(std::ostream& os, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& columns,
                     const std::vector<std::string>& comments) {
  if (header.size() != columns.size()) throw std::invalid_argument("table csv: header/column mismatch");
  for (const auto& col : columns) {
    if (col.size() != columns.front().size()) throw std::invalid_argument("table csv: ragged columns");
  }
  write_comments(os, comments);
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << "\n";
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c)
      os << (c ? "," : "") << format_double(columns[c][r]);
    os << "\n";
  }
}

void write_pgm(std::ostream& os, const TransmissionMap& map) {
  os << "P5\n" << map.cols() << " " << map.rows() << "\n255\n";
  std::string pixels;
  pixels.reserve(map.amplitude.size());
  for (double v : map.amplitude) {
    const double c = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
    pixels.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * c))));
  }
  os.write(pixels.data(), static_cast<std::streamsize>(pixels.size()));
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << content;
  if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace mavg::io
