#include "persim/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "persim/error.hpp"

namespace persim {

std::string format_value(double v) {
  if (v == std::floor(v) && std::abs(v) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.0f", v);
    return buf;
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path,
                     const std::vector<std::string>& header)
    : out_(path), columns_(header.size()) {
  if (!out_) throw Error("csv: cannot open '" + path + "'");
  for (size_t i = 0; i < header.size(); ++i)
    out_ << header[i] << (i + 1 == header.size() ? "\n" : ",");
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != columns_) throw Error("csv: column count mismatch");
  for (size_t i = 0; i < values.size(); ++i)
    out_ << format_value(values[i]) << (i + 1 == values.size() ? "\n" : ",");
}

void CsvWriter::raw_row(const std::string& line) { out_ << line << "\n"; }

std::string run_id(const std::string& canonical_config, uint64_t seed) {
  uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ULL;
  };
  for (char c : canonical_config) feed(static_cast<unsigned char>(c));
  for (int i = 0; i < 8; ++i) feed(static_cast<unsigned char>(seed >> (8 * i)));
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_svg(const std::string& path,
               const std::vector<std::string>& column_names,
               const std::vector<std::vector<double>>& columns) {
  if (columns.size() < 2 || columns[0].empty())
    throw Error("svg: need an abscissa and at least one series");
  const int W = 900, H = 480, margin = 50;
  std::ofstream out(path);
  if (!out) throw Error("svg: cannot open '" + path + "'");
  const auto& xs = columns[0];
  double xmin = xs.front(), xmax = xs.back();
  if (xmax <= xmin) xmax = xmin + 1;
  double ymin = 1e300, ymax = -1e300;
  for (size_t c = 1; c < columns.size(); ++c)
    for (double v : columns[c]) {
      if (!std::isfinite(v)) continue;
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  if (ymax <= ymin) {
    ymax = ymin + 1;
    ymin -= 1;
  }
  const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                           "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
      << "\" height=\"" << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  auto px = [&](double x) {
    return margin + (x - xmin) / (xmax - xmin) * (W - 2 * margin);
  };
  auto py = [&](double y) {
    return H - margin - (y - ymin) / (ymax - ymin) * (H - 2 * margin);
  };
  out << "<line x1=\"" << margin << "\" y1=\"" << H - margin << "\" x2=\""
      << W - margin << "\" y2=\"" << H - margin
      << "\" stroke=\"black\"/>\n<line x1=\"" << margin << "\" y1=\"" << margin
      << "\" x2=\"" << margin << "\" y2=\"" << H - margin
      << "\" stroke=\"black\"/>\n";
  for (size_t c = 1; c < columns.size(); ++c) {
    out << "<polyline fill=\"none\" stroke=\"" << palette[(c - 1) % 8]
        << "\" stroke-width=\"1.2\" points=\"";
    const size_t stride = std::max<size_t>(1, xs.size() / 2000);
    for (size_t i = 0; i < xs.size(); i += stride) {
      double v = columns[c][i];
      if (!std::isfinite(v)) v = ymin;
      out << px(xs[i]) << "," << py(v) << " ";
    }
    out << "\"/>\n";
    out << "<text x=\"" << W - margin + 4 << "\" y=\""
        << margin + 16 * static_cast<int>(c) << "\" fill=\""
        << palette[(c - 1) % 8] << "\" font-size=\"11\">" << column_names[c]
        << "</text>\n";
  }
  out << "<text x=\"" << W / 2 << "\" y=\"" << H - 12
      << "\" font-size=\"12\">" << column_names[0] << "</text>\n";
  out << "</svg>\n";
}

void ensure_dir(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw Error("io: cannot create directory '" + path + "'");
}

}  // namespace persim
