#include "wparab/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "wparab/error.hpp"

namespace wparab {

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt("%.17g", v);
}

std::string xml_escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '&': o += "&amp;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

}  // namespace

std::string json_number(double v) {
  if (std::isnan(v)) return "\"nan\"";
  if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
  if (v == 0.0) return "0";  // folds -0
  return fmt("%.17g", v);
}

std::string json_string(const std::string& s) {
  std::string o = "\"";
  for (unsigned char c : s) {
    switch (c) {
      case '"': o += "\\\""; break;
      case '\\': o += "\\\\"; break;
      case '\n': o += "\\n"; break;
      case '\t': o += "\\t"; break;
      case '\r': o += "\\r"; break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          o += buf;
        } else {
          o += char(c);
        }
    }
  }
  return o + "\"";
}

std::string report_to_json(const AuditReport& r) {
  std::ostringstream o;
  o << "{\n";
  o << "  \"anchor\": " << json_string(r.anchor) << ",\n";
  o << "  \"name\": " << json_string(r.name) << ",\n";
  o << "  \"notes\": {";
  {
    bool first = true;
    for (const auto& [k, v] : r.notes) {
      o << (first ? "\n" : ",\n") << "    " << json_string(k) << ": " << json_string(v);
      first = false;
    }
    o << (r.notes.empty() ? "},\n" : "\n  },\n");
  }
  o << "  \"pass\": " << (r.pass ? "true" : "false") << ",\n";
  o << "  \"rows\": [";
  for (std::size_t j = 0; j < r.rows.size(); ++j) {
    const AuditRow& w = r.rows[j];
    o << (j ? ",\n" : "\n") << "    {\"budget\": " << json_number(w.budget)
      << ", \"constant\": " << json_number(w.constant) << ", \"label\": " << json_string(w.label)
      << ", \"lhs\": " << json_number(w.lhs) << ", \"pass\": " << (w.pass ? "true" : "false")
      << ", \"rhs\": " << json_number(w.rhs) << "}";
  }
  o << (r.rows.empty() ? "],\n" : "\n  ],\n");
  o << "  \"tables\": {";
  {
    bool first = true;
    for (const auto& [k, t] : r.tables) {
      o << (first ? "\n" : ",\n") << "    " << json_string(k) << ": {\"columns\": [";
      for (std::size_t c = 0; c < t.columns.size(); ++c) o << (c ? ", " : "") << json_string(t.columns[c]);
      o << "], \"rows\": [";
      for (std::size_t i = 0; i < t.rows.size(); ++i) {
        o << (i ? ", " : "") << "[";
        for (std::size_t c = 0; c < t.rows[i].size(); ++c) o << (c ? ", " : "") << json_number(t.rows[i][c]);
        o << "]";
      }
      o << "]}";
      first = false;
    }
    o << (r.tables.empty() ? "},\n" : "\n  },\n");
  }
  o << "  \"values\": {";
  {
    bool first = true;
    for (const auto& [k, v] : r.values) {
      o << (first ? "\n" : ",\n") << "    " << json_string(k) << ": " << json_number(v);
      first = false;
    }
    o << (r.values.empty() ? "}\n" : "\n  }\n");
  }
  o << "}\n";
  return o.str();
}

std::string table_to_csv(const Table& t) {
  std::ostringstream o;
  for (std::size_t c = 0; c < t.columns.size(); ++c) o << (c ? "," : "") << t.columns[c];
  o << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) o << (c ? "," : "") << csv_number(row[c]);
    o << "\n";
  }
  return o.str();
}

std::string plot_to_svg(const SvgPlot& p) {
  constexpr double W = 640, H = 420, L = 70, R = 150, T = 40, B = 50;
  auto tx = [&](double v) { return p.logx ? std::log10(v) : v; };
  auto ty = [&](double v) { return p.logy ? std::log10(v) : v; };
  auto usable = [&](double x, double y) {
    return std::isfinite(tx(x)) && std::isfinite(ty(y));
  };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : p.series)
    for (std::size_t j = 0; j < std::min(s.x.size(), s.y.size()); ++j)
      if (usable(s.x[j], s.y[j])) {
        x0 = std::min(x0, tx(s.x[j]));
        x1 = std::max(x1, tx(s.x[j]));
        y0 = std::min(y0, ty(s.y[j]));
        y1 = std::max(y1, ty(s.y[j]));
      }
  if (!(x1 >= x0)) x0 = 0, x1 = 1;
  if (!(y1 >= y0)) y0 = 0, y1 = 1;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  auto px = [&](double v) { return L + (tx(v) - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double v) { return H - B - (ty(v) - y0) / (y1 - y0) * (H - T - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << " " << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
    << xml_escape(p.title) << "</text>\n";
  o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = x0 + (x1 - x0) * k / 4, fy = y0 + (y1 - y0) * k / 4;
    const double sx = L + (W - L - R) * k / 4, sy = H - B - (H - T - B) * k / 4;
    o << "<text x=\"" << fmt("%.2f", sx) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">"
      << fmt("%.3g", p.logx ? std::pow(10.0, fx) : fx) << "</text>\n";
    o << "<text x=\"" << L - 6 << "\" y=\"" << fmt("%.2f", sy + 4) << "\" text-anchor=\"end\">"
      << fmt("%.3g", p.logy ? std::pow(10.0, fy) : fy) << "</text>\n";
  }
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
    << xml_escape(p.xlabel) << "</text>\n";
  o << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << (T + H - B) / 2 << ")\">" << xml_escape(p.ylabel) << "</text>\n";
  for (std::size_t s = 0; s < p.series.size(); ++s) {
    const auto& ser = p.series[s];
    const char* col = colors[s % 6];
    std::string pts;
    for (std::size_t j = 0; j < std::min(ser.x.size(), ser.y.size()); ++j) {
      if (!usable(ser.x[j], ser.y[j])) continue;
      pts += fmt("%.2f", px(ser.x[j])) + "," + fmt("%.2f", py(ser.y[j])) + " ";
      o << "<circle cx=\"" << fmt("%.2f", px(ser.x[j])) << "\" cy=\"" << fmt("%.2f", py(ser.y[j]))
        << "\" r=\"3\" fill=\"" << col << "\"/>\n";
    }
    if (!pts.empty()) pts.pop_back();
    o << "<polyline points=\"" << pts << "\" fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\"/>\n";
    o << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 16 * (s + 1) << "\" fill=\"" << col << "\">"
      << xml_escape(ser.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  f << text;
  if (!f) fail(ErrorKind::IoError, "write failed for " + path.string());
}

}  // namespace wparab
