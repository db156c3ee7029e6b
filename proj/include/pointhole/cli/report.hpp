#pragma once
//
// Read-only aggregation of sweep CSVs: log-log SVG plots of the error columns
// against |ln eps| and a text summary of fitted exponents.
//

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pointhole/errors.hpp"
#include "pointhole/harness.hpp"

namespace pointhole::cli {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  }

  std::vector<double> numbers(const std::string& name) const {
    const int c = column(name);
    if (c < 0) throw DomainError("csv: missing column " + name);
    std::vector<double> out;
    for (const auto& r : rows) {
      const std::string& s = r.at(c);
      out.push_back(s == "nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(s));
    }
    return out;
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path);
  CsvTable t;
  std::string line;
  if (std::getline(in, line)) t.header = split_csv_line(line);
  while (std::getline(in, line))
    if (!line.empty()) t.rows.push_back(split_csv_line(line));
  return t;
}

struct Series {
  std::string name;
  std::string color;
  std::vector<double> x, y;
};

/// Log-log line plot; non-positive or non-finite points are skipped.
inline std::string svg_loglog(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                              const std::vector<Series>& series) {
  const double W = 640, H = 420, ml = 70, mr = 150, mt = 40, mb = 50;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (s.x[i] > 0.0 && s.y[i] > 0.0 && std::isfinite(s.y[i])) {
        x0 = std::min(x0, std::log10(s.x[i]));
        x1 = std::max(x1, std::log10(s.x[i]));
        y0 = std::min(y0, std::log10(s.y[i]));
        y1 = std::max(y1, std::log10(s.y[i]));
      }
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
  if (!std::isfinite(x0)) {
    o << "<text x=\"" << W / 2 << "\" y=\"" << H / 2 << "\" text-anchor=\"middle\">no positive data</text>\n</svg>\n";
    return o.str();
  }
  if (x1 - x0 < 1e-9) x0 -= 0.1, x1 += 0.1;
  y0 = std::floor(y0);
  y1 = std::ceil(y1);
  if (y1 - y0 < 1.0) y1 = y0 + 1.0;
  const double pw = W - ml - mr, ph = H - mt - mb;
  auto X = [&](double v) { return ml + (std::log10(v) - x0) / (x1 - x0) * pw; };
  auto Y = [&](double v) { return mt + (y1 - std::log10(v)) / (y1 - y0) * ph; };
  o << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int d = static_cast<int>(y0); d <= static_cast<int>(y1); ++d) {
    const double yy = mt + (y1 - d) / (y1 - y0) * ph;
    o << "<line x1=\"" << ml << "\" x2=\"" << ml + pw << "\" y1=\"" << yy << "\" y2=\"" << yy
      << "\" stroke=\"#ddd\"/>\n";
    o << "<text x=\"" << ml - 6 << "\" y=\"" << yy + 4 << "\" text-anchor=\"end\" font-size=\"11\">1e" << d
      << "</text>\n";
  }
  for (int k = 0; k <= 4; ++k) {
    const double lv = x0 + (x1 - x0) * k / 4.0, xx = ml + pw * k / 4.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", std::pow(10.0, lv));
    o << "<text x=\"" << xx << "\" y=\"" << mt + ph + 16 << "\" text-anchor=\"middle\" font-size=\"11\">" << buf
      << "</text>\n";
  }
  o << "<text x=\"" << ml + pw / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">" << xlabel
    << "</text>\n";
  o << "<text x=\"16\" y=\"" << mt + ph / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
    << mt + ph / 2 << ")\">" << ylabel << "</text>\n";
  int legend = 0;
  for (const auto& s : series) {
    std::ostringstream pts;
    int n = 0;
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (s.x[i] > 0.0 && s.y[i] > 0.0 && std::isfinite(s.y[i])) {
        pts << X(s.x[i]) << ',' << Y(s.y[i]) << ' ';
        ++n;
      }
    if (n == 0) continue;
    o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.8\" points=\"" << pts.str()
      << "\"/>\n";
    const double ly = mt + 14 + 18 * legend++;
    o << "<line x1=\"" << ml + pw + 10 << "\" x2=\"" << ml + pw + 30 << "\" y1=\"" << ly << "\" y2=\"" << ly
      << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << ml + pw + 36 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">" << s.name << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

struct ReportTarget {
  std::string column;
  double target;
  double lo, hi;
};

/// Expected exponents in |ln eps| for the sweep columns.
inline const std::vector<ReportTarget>& report_targets() {
  static const std::vector<ReportTarget> t = {{"err_l2", 1.0, 0.9, 1.1},
                                              {"err_grad", 0.5, 0.4, 0.6},
                                              {"err_localized", 1.0, 0.9, 1.1},
                                              {"gap_m0", 1.0, 0.8, 1.2}};
  return t;
}

/// SVG of one sweep CSV and the summary lines for it.
inline std::pair<std::string, std::string> report_sweep(const CsvTable& t, const std::string& label) {
  const auto eps = t.numbers("eps");
  std::vector<double> x;
  for (double e : eps) x.push_back(std::abs(std::log(e)));
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  std::vector<Series> series;
  std::ostringstream summary;
  summary << label << "\n";
  int ci = 0;
  for (const auto& target : report_targets()) {
    const auto y = t.numbers(target.column);
    bool any = false;
    for (double v : y) any = any || (v > 0.0 && std::isfinite(v));
    if (!any) continue;
    series.push_back({target.column, colors[ci++ % 5], x, y});
    const auto fit = harness::try_fit_log_rate(y, eps);
    const bool in_band = fit.p >= target.lo && fit.p <= target.hi;
    summary << "  " << harness::describe_fit(target.column, fit) << "; expected " << target.target << " (band ["
            << target.lo << ", " << target.hi << "]) " << (in_band && !fit.inconclusive ? "within" : "outside")
            << "\n";
  }
  return {svg_loglog(label, "|ln eps|", "error", series), summary.str()};
}

}  // namespace pointhole::cli
