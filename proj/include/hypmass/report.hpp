#pragma once

// Flat-file report emission: CSV with fixed column order and %.17g doubles
// (byte-identical across reruns), JSON via nlohmann, and minimal static SVG
// line charts for the sweep outputs.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace hypmass {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_row(const std::vector<double>& r) {
    if (r.size() != columns.size())
      throw std::invalid_argument("Table: row width does not match column count");
    rows.push_back(r);
  }
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_csv(const Table& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  for (std::size_t i = 0; i < t.columns.size(); ++i)
    out << (i ? "," : "") << t.columns[i];
  out << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << format_double(row[i]);
    out << "\n";
  }
  if (!out) throw std::runtime_error("write_csv: write failed for " + path);
}

inline nlohmann::json table_to_json(const Table& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : t.rows) {
    nlohmann::json r;
    for (std::size_t i = 0; i < row.size(); ++i) r[t.columns[i]] = row[i];
    rows.push_back(r);
  }
  return rows;
}

inline Table table_from_json(const nlohmann::json& rows,
                             const std::vector<std::string>& columns) {
  Table t;
  t.columns = columns;
  for (const auto& r : rows) {
    std::vector<double> row;
    for (const auto& c : columns) row.push_back(r.at(c).get<double>());
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline void write_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_json: cannot open " + path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("write_json: write failed for " + path);
}

// One log-log polyline per series over a shared x column.
inline void write_svg_loglog(const Table& t, std::size_t x_col,
                             const std::vector<std::size_t>& y_cols, const std::string& title,
                             const std::string& path) {
  const int W = 640, H = 420, ml = 70, mr = 20, mt = 40, mb = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  auto usable = [](double v) { return v > 0.0 && std::isfinite(v); };
  for (const auto& row : t.rows) {
    if (usable(row[x_col])) {
      xmin = std::min(xmin, row[x_col]);
      xmax = std::max(xmax, row[x_col]);
    }
    for (std::size_t c : y_cols)
      if (usable(row[c])) {
        ymin = std::min(ymin, row[c]);
        ymax = std::max(ymax, row[c]);
      }
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_svg_loglog: cannot open " + path);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  out << "<text x='" << W / 2 << "' y='24' text-anchor='middle' font-size='15'>" << title
      << "</text>\n";
  if (xmin < xmax && ymin <= ymax) {
    if (ymin == ymax) ymax = ymin * 10.0;
    auto px = [&](double v) {
      return ml + (std::log10(v) - std::log10(xmin)) / (std::log10(xmax) - std::log10(xmin)) *
                      (W - ml - mr);
    };
    auto py = [&](double v) {
      return H - mb - (std::log10(v) - std::log10(ymin)) /
                          (std::log10(ymax) - std::log10(ymin)) * (H - mt - mb);
    };
    out << "<rect x='" << ml << "' y='" << mt << "' width='" << (W - ml - mr) << "' height='"
        << (H - mt - mb) << "' fill='none' stroke='black'/>\n";
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    for (std::size_t s = 0; s < y_cols.size(); ++s) {
      out << "<polyline fill='none' stroke='" << colors[s % 6] << "' stroke-width='1.5' points='";
      for (const auto& row : t.rows)
        if (usable(row[x_col]) && usable(row[y_cols[s]]))
          out << px(row[x_col]) << "," << py(row[y_cols[s]]) << " ";
      out << "'/>\n";
      out << "<text x='" << (ml + 8) << "' y='" << (mt + 16 + 14 * s) << "' font-size='11' fill='"
          << colors[s % 6] << "'>" << t.columns[y_cols[s]] << "</text>\n";
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3g", xmin);
    out << "<text x='" << ml << "' y='" << H - mb + 16 << "' font-size='11'>" << buf
        << "</text>\n";
    std::snprintf(buf, sizeof(buf), "%.3g", xmax);
    out << "<text x='" << W - mr << "' y='" << H - mb + 16
        << "' text-anchor='end' font-size='11'>" << buf << "</text>\n";
    std::snprintf(buf, sizeof(buf), "%.3g", ymin);
    out << "<text x='" << ml - 6 << "' y='" << H - mb << "' text-anchor='end' font-size='11'>"
        << buf << "</text>\n";
    std::snprintf(buf, sizeof(buf), "%.3g", ymax);
    out << "<text x='" << ml - 6 << "' y='" << mt + 4 << "' text-anchor='end' font-size='11'>"
        << buf << "</text>\n";
    out << "<text x='" << (W / 2) << "' y='" << H - 12 << "' text-anchor='middle' font-size='12'>"
        << t.columns[x_col] << " (log)</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace hypmass
