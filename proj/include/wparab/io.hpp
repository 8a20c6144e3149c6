#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "wparab/report.hpp"

namespace wparab {

/// %.17g for finite values; "inf", "-inf" and "nan" as JSON strings.
std::string json_number(double v);
std::string json_string(const std::string& s);

/// Canonical JSON: sorted keys, two-space indent, trailing newline.
std::string report_to_json(const AuditReport& report);
std::string table_to_csv(const Table& table);

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct SvgPlot {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool logx = false;
  bool logy = false;
  std::vector<SvgSeries> series;
};

std::string plot_to_svg(const SvgPlot& plot);

/// Throws IoError.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace wparab
