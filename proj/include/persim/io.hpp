#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace persim {

/// Fixed-format CSV writer: 12 significant digits, '.' decimal point,
/// newline rows. Deterministic output for byte-reproducibility checks.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);
  void raw_row(const std::string& line);

 private:
  std::ofstream out_;
  size_t columns_;
};

std::string format_value(double v);

/// FNV-1a 64-bit over the canonical config text; names the run directory.
std::string run_id(const std::string& canonical_config, uint64_t seed);

/// Minimal polyline SVG of columns against the first column.
void write_svg(const std::string& path,
               const std::vector<std::string>& column_names,
               const std::vector<std::vector<double>>& columns);

void ensure_dir(const std::string& path);

}  // namespace persim
