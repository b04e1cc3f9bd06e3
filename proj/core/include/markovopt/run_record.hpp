#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "markovopt/types.hpp"

namespace markovopt {

enum class Metric {
  kDistSq,     // ||x - x*||^2
  kSubopt,     // f - f* (at x_f for the accelerated method)
  kGradSq,     // ||grad f||^2
  kAvgGradSq,  // (1/K) sum_{k<K} ||grad f(x^k)||^2
  kGap,        // Gap of the running average of the extrapolated points
  kLyapunov,   // ||x - x*||^2 + (6/mu)(f(x_f) - f*)
};

std::string metric_name(Metric metric);
Metric metric_from_name(const std::string& name);
std::vector<Metric> metrics_from_names(const std::vector<std::string>& names);

/// Per-iteration metric series with the cumulative oracle-call meter.
struct RunRecord {
  std::vector<Metric> metrics;
  std::vector<std::uint64_t> iteration;
  std::vector<std::uint64_t> oracle_calls;
  /// values[m][row] for metrics[m].
  std::vector<std::vector<double>> values;

  Vector final_x;
  Vector final_x_f;
  std::uint64_t total_oracle_calls = 0;
  std::uint64_t total_chain_advance = 0;
  /// Largest residual of the momentum-update identity (0 when unchecked).
  double identity_residual = 0.0;
  /// Stepsize used at each iteration.
  std::vector<double> gamma;
  /// First iteration of each restart (restart variant only).
  std::vector<std::uint64_t> restart_starts;
  bool stopped_early = false;

  nlohmann::json config;
  std::uint64_t seed = 0;

  std::size_t rows() const { return iteration.size(); }
  bool has(Metric metric) const;
  const std::vector<double>& series(Metric metric) const;
  double last(Metric metric) const { return series(metric).back(); }
};

}  // namespace markovopt
