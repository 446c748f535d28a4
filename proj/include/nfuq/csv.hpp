#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace nfuq {

/// Formats a double with 17 significant digits (round-trip exact).
inline std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// RFC-4180-style CSV writer: header row, comma separated, '.' decimal.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path) {
    if (!out_) throw std::runtime_error("cannot open output file '" + path + "'");
  }

  void header(const std::vector<std::string>& names) { write_row(names); }

  void row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(csv_number(v));
    write_row(cells);
  }

  void row(const std::vector<std::string>& cells) { write_row(cells); }

 private:
  void write_row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << "\r\n";
  }

  std::ofstream out_;
};

}  // namespace nfuq
