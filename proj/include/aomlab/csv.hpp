#pragma once

#include <string>
#include <vector>

namespace aomlab {

// 17 significant digits (round-trips binary64); +inf is written as `inf`.
std::string format_real(double value);

double parse_real(const std::string& text);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  // Index of a named column; throws Error(invalid_argument) when absent.
  std::size_t column(const std::string& name) const;
  std::vector<double> column_values(const std::string& name) const;
};

// Numeric CSV with a mandatory header row.
CsvTable read_csv(const std::string& path);

void write_text_file(const std::string& path, const std::string& contents);

}  // namespace aomlab
