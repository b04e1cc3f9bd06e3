#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "markovopt/fit.hpp"

namespace markovopt {

struct ScalingRow {
  double epsilon = 0.0;
  int tau = 0;
  /// First iteration at which the median-over-seeds relative error is at
  /// most the target (the budget when censored).
  std::uint64_t iterations_to_target = 0;
  /// Median over seeds of the cumulative oracle calls at that iteration.
  double oracle_calls_to_target = 0.0;
  bool censored = false;
  std::uint64_t budget = 0;
  /// Resolved algorithm parameters for this epsilon.
  nlohmann::json params;
};

struct ScalingTable {
  std::vector<ScalingRow> rows;
  double target = 0.0;
  /// log(oracle calls) against log(tau) over the uncensored rows (needs at
  /// least two distinct tau values).
  std::optional<FitResult> slope;
};

/// For each epsilon, replaces the kernel of `base` with two_state(epsilon),
/// resolves the accelerated parameters (b = tau unless given) and runs
/// every seed until ||x - x*||^2 <= target ||x0 - x*||^2 or the iteration
/// budget is spent. A seed that stops early keeps its last error and call
/// count for the remaining iterations of the median.
ScalingTable tau_scaling_study(const nlohmann::json& base,
                               const std::vector<double>& epsilons,
                               double target);

nlohmann::json to_json(const ScalingTable& table);
ScalingTable scaling_table_from_json(const nlohmann::json& j);
std::string scaling_csv(const ScalingTable& table);

}  // namespace markovopt
