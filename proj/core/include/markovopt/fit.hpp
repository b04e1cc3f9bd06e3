#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "markovopt/run_record.hpp"

namespace markovopt {

enum class FitModel {
  kLinearRate,  // log y = a + rate * k
  kPowerLaw,    // log y = a + exponent * log k
};

std::string fit_model_name(FitModel model);
FitModel fit_model_from_name(const std::string& name);

/// Iterations k with begin <= k <= end.
struct FitWindow {
  std::uint64_t begin = 0;
  std::uint64_t end = 0;
};

struct FitResult {
  FitModel model = FitModel::kLinearRate;
  /// Rate (per iteration) or exponent.
  double slope = 0.0;
  double intercept = 0.0;
  /// 1.96 standard errors of the slope.
  double half_width = 0.0;
  /// Root mean square residual in log space.
  double residual = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares of log y against x (linear_rate) or log x
/// (power_law). Throws FitDomainError for nonpositive y (or x in the power
/// law) and ParameterError for fewer than two points.
FitResult fit_series(const std::vector<double>& x, const std::vector<double>& y,
                     FitModel model);

/// Mean over seeds at each common row, then fit_series on the window. The
/// default window drops the first `burn_in` fraction of iterations.
FitResult fit_rate(const std::vector<RunRecord>& records, Metric metric,
                   std::optional<FitWindow> window, FitModel model,
                   double burn_in = 0.1);

/// Iteration grid and per-row mean over seeds, truncated to the rows that
/// every record reached.
struct SeedMean {
  std::vector<std::uint64_t> iteration;
  std::vector<double> mean;
};
SeedMean mean_over_seeds(const std::vector<RunRecord>& records, Metric metric);

/// Median of the values (mean of the middle two for even counts).
double median(std::vector<double> values);
/// Linear-interpolated quantile, q in [0, 1].
double quantile(std::vector<double> values, double q);

}  // namespace markovopt
