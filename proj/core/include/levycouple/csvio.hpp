#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "levycouple/common.hpp"

namespace lvc {

// Minimal RFC-style CSV writer: header row required, fields quoted when they
// contain a comma, quote or newline. Doubles printed with %.17g so identical
// runs produce byte-identical files.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);

  void row(const std::vector<std::string>& fields);
  void row_values(const std::vector<double>& values);
  void field(std::string& out, double v) const;

  static std::string format_double(double v);

 private:
  std::ofstream out_;
  std::size_t n_cols_;
  void write_row(const std::vector<std::string>& fields);
};

}  // namespace lvc
