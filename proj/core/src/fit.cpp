#include "markovopt/fit.hpp"

#include <algorithm>
#include <cmath>

#include "markovopt/error.hpp"

namespace markovopt {

std::string fit_model_name(FitModel model) {
  return model == FitModel::kLinearRate ? "linear_rate" : "power_law";
}

FitModel fit_model_from_name(const std::string& name) {
  if (name == "linear_rate") return FitModel::kLinearRate;
  if (name == "power_law") return FitModel::kPowerLaw;
  throw ConfigError("unknown fit model \"" + name + "\"");
}

FitResult fit_series(const std::vector<double>& x, const std::vector<double>& y,
                     FitModel model) {
  if (x.size() != y.size()) throw ParameterError("fit: x and y differ in length");
  if (x.size() < 2) throw ParameterError("fit needs at least two points");
  const std::size_t n = x.size();
  std::vector<double> u(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(y[i] > 0.0) || !std::isfinite(y[i])) {
      throw FitDomainError("fit: nonpositive value in window");
    }
    if (model == FitModel::kPowerLaw && !(x[i] > 0.0)) {
      throw FitDomainError("fit: power law needs positive abscissae");
    }
    u[i] = model == FitModel::kPowerLaw ? std::log(x[i]) : x[i];
    v[i] = std::log(y[i]);
  }
  double mu_u = 0.0, mu_v = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mu_u += u[i];
    mu_v += v[i];
  }
  mu_u /= static_cast<double>(n);
  mu_v /= static_cast<double>(n);
  double suu = 0.0, suv = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    suu += (u[i] - mu_u) * (u[i] - mu_u);
    suv += (u[i] - mu_u) * (v[i] - mu_v);
  }
  if (!(suu > 0.0)) throw ParameterError("fit: abscissae are all equal");

  FitResult r;
  r.model = model;
  r.points = n;
  r.slope = suv / suu;
  r.intercept = mu_v - r.slope * mu_u;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = v[i] - (r.intercept + r.slope * u[i]);
    sse += e * e;
  }
  r.residual = std::sqrt(sse / static_cast<double>(n));
  if (n > 2) {
    r.half_width = 1.96 * std::sqrt(sse / static_cast<double>(n - 2) / suu);
  }
  return r;
}

SeedMean mean_over_seeds(const std::vector<RunRecord>& records, Metric metric) {
  if (records.empty()) throw ParameterError("no records to aggregate");
  std::size_t rows = records.front().rows();
  for (const auto& r : records) rows = std::min(rows, r.rows());
  SeedMean out;
  for (std::size_t row = 0; row < rows; ++row) {
    const std::uint64_t k = records.front().iteration[row];
    double sum = 0.0;
    for (const auto& r : records) {
      if (r.iteration[row] != k) {
        throw ParameterError("records are recorded on different iteration grids");
      }
      sum += r.series(metric)[row];
    }
    out.iteration.push_back(k);
    out.mean.push_back(sum / static_cast<double>(records.size()));
  }
  return out;
}

FitResult fit_rate(const std::vector<RunRecord>& records, Metric metric,
                   std::optional<FitWindow> window, FitModel model,
                   double burn_in) {
  const SeedMean m = mean_over_seeds(records, metric);
  if (m.iteration.empty()) throw ParameterError("records have no rows");
  FitWindow w;
  if (window) {
    w = *window;
    if (w.begin > w.end || w.end > m.iteration.back()) {
      throw ParameterError("fit window lies outside the series");
    }
  } else {
    const std::uint64_t last = m.iteration.back();
    w.begin = static_cast<std::uint64_t>(std::ceil(burn_in * static_cast<double>(last)));
    w.end = last;
  }
  std::vector<double> x, y;
  for (std::size_t i = 0; i < m.iteration.size(); ++i) {
    const auto k = m.iteration[i];
    if (k < w.begin || k > w.end) continue;
    if (model == FitModel::kPowerLaw && k == 0) continue;
    x.push_back(static_cast<double>(k));
    y.push_back(m.mean[i]);
  }
  return fit_series(x, y, model);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ParameterError("quantile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

}  // namespace markovopt
