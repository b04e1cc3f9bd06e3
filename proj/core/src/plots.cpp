#include "markovopt/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "markovopt/error.hpp"
#include "markovopt/fit.hpp"

namespace markovopt {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

std::string num(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.2f", v);
  return buffer;
}

std::string label(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.3g", v);
  return buffer;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Maps data coordinates into the plot frame.
struct Frame {
  double x0, x1, y0, y1;

  double px(double x) const {
    return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight);
  }
  double py(double y) const {
    return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom);
  }
};

Frame make_frame(double x0, double x1, double y0, double y1) {
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  return {x0, x1, y0, y1};
}

std::string header(const std::string& title) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) +
         "\" height=\"" + num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n"
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
         "<text x=\"" + num(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
         escape(title) + "</text>\n";
}

/// Frame box, ticks and axis labels. Log axes are labelled 10^v.
std::string axes(const Frame& f, const std::string& xlabel, const std::string& ylabel,
                 bool log_x) {
  std::string out = "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" +
                    num(kWidth - kLeft - kRight) + "\" height=\"" +
                    num(kHeight - kTop - kBottom) +
                    "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / 4.0;
    const double yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
    out += "<text x=\"" + num(f.px(xv)) + "\" y=\"" + num(kHeight - kBottom + 16) +
           "\" text-anchor=\"middle\">" + label(log_x ? std::pow(10.0, xv) : xv) +
           "</text>\n";
    out += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(f.py(yv) + 4) +
           "\" text-anchor=\"end\">" + label(std::pow(10.0, yv)) + "</text>\n";
  }
  out += "<text x=\"" + num((kLeft + kWidth - kRight) / 2) + "\" y=\"" +
         num(kHeight - 12) + "\" text-anchor=\"middle\">" + escape(xlabel) + "</text>\n";
  out += "<text transform=\"translate(16," + num((kTop + kHeight - kBottom) / 2) +
         ") rotate(-90)\" text-anchor=\"middle\">" + escape(ylabel) + "</text>\n";
  return out;
}

double safe_log10(double v) {
  return std::log10(std::max(v, std::numeric_limits<double>::min()));
}

}  // namespace

std::string convergence_svg(const std::vector<RunRecord>& records, Metric metric,
                            const std::string& title) {
  if (records.empty()) throw ParameterError("nothing to plot");
  std::size_t rows = records.front().rows();
  for (const auto& r : records) rows = std::min(rows, r.rows());
  if (rows == 0) throw ParameterError("records have no rows");

  std::vector<double> k(rows), lo(rows), mid(rows), hi(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    std::vector<double> column;
    for (const auto& r : records) column.push_back(r.series(metric)[i]);
    k[i] = static_cast<double>(records.front().iteration[i]);
    mid[i] = safe_log10(median(column));
    lo[i] = safe_log10(quantile(column, 0.25));
    hi[i] = safe_log10(quantile(column, 0.75));
  }
  const Frame f = make_frame(k.front(), k.back(), *std::min_element(lo.begin(), lo.end()),
                             *std::max_element(hi.begin(), hi.end()));

  std::string out = header(title) + axes(f, "iteration", metric_name(metric), false);
  if (records.size() > 1) {
    out += "<polygon fill=\"#9ecae1\" fill-opacity=\"0.6\" stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < rows; ++i) out += num(f.px(k[i])) + "," + num(f.py(hi[i])) + " ";
    for (std::size_t i = rows; i-- > 0;) out += num(f.px(k[i])) + "," + num(f.py(lo[i])) + " ";
    out += "\"/>\n";
  }
  out += "<polyline fill=\"none\" stroke=\"#08519c\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < rows; ++i) out += num(f.px(k[i])) + "," + num(f.py(mid[i])) + " ";
  out += "\"/>\n";
  out += "<text x=\"" + num(kWidth - kRight - 6) + "\" y=\"" + num(kTop + 16) +
         "\" text-anchor=\"end\">" +
         (records.size() > 1 ? "median and IQR over " + std::to_string(records.size()) + " seeds"
                             : std::string("single run")) +
         "</text>\n";
  out += "</svg>\n";
  return out;
}

std::string scaling_svg(const ScalingTable& table, const std::string& title) {
  if (table.rows.empty()) throw ParameterError("nothing to plot");
  std::vector<double> x, y;
  for (const auto& r : table.rows) {
    x.push_back(safe_log10(r.tau));
    y.push_back(safe_log10(r.oracle_calls_to_target));
  }
  const double pad = 0.1;
  const Frame f = make_frame(*std::min_element(x.begin(), x.end()) - pad,
                             *std::max_element(x.begin(), x.end()) + pad,
                             *std::min_element(y.begin(), y.end()) - pad,
                             *std::max_element(y.begin(), y.end()) + pad);
  std::string out = header(title) + axes(f, "tau", "oracle calls to target", true);
  for (std::size_t i = 0; i < x.size(); ++i) {
    out += "<circle cx=\"" + num(f.px(x[i])) + "\" cy=\"" + num(f.py(y[i])) +
           "\" r=\"4\" stroke=\"#a50f15\" fill=\"" +
           (table.rows[i].censored ? "white" : "#a50f15") + "\"/>\n";
  }
  if (table.slope) {
    // The fit is in natural logs; the slope is base independent.
    const double s = table.slope->slope;
    const double c = table.slope->intercept / std::log(10.0);
    out += "<line x1=\"" + num(f.px(f.x0)) + "\" y1=\"" + num(f.py(c + s * f.x0)) +
           "\" x2=\"" + num(f.px(f.x1)) + "\" y2=\"" + num(f.py(c + s * f.x1)) +
           "\" stroke=\"#444\" stroke-dasharray=\"5,3\"/>\n";
    out += "<text x=\"" + num(kLeft + 8) + "\" y=\"" + num(kTop + 16) + "\">slope " +
           label(s) + " +/- " + label(table.slope->half_width) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace markovopt
