#include "markovopt/scaling.hpp"

#include <cmath>
#include <set>

#include "markovopt/error.hpp"
#include "markovopt/experiment.hpp"
#include "markovopt/serialization.hpp"

namespace markovopt {

namespace {

using nlohmann::json;

ScalingRow study_point(const json& base, double epsilon, double target) {
  json document = base;
  document["kernel"] = {{"kind", "two_state"}, {"epsilon", epsilon}};
  document["metrics"] = {"dist_sq"};
  document["record_every"] = 1;
  document.erase("stop");
  if (!document.contains("algorithm")) document["algorithm"] = {{"name", "rasgd"}};

  ExperimentConfig config = parse_experiment_config(document);
  if (config.algorithm != "rasgd") {
    throw ConfigError("the scaling study runs the accelerated method");
  }
  const ExperimentSetup setup = prepare_experiment(config);
  const auto& x_star = setup.smooth->minimizer();
  if (!x_star) throw ConfigError("the scaling study needs a known minimiser");
  const double d0 = (setup.x0 - *x_star).squaredNorm();
  if (!(d0 > 0.0)) throw ConfigError("initial point coincides with the minimiser");
  config.stop = StopRule{Metric::kDistSq, target * d0};

  const std::vector<RunRecord> records = run_seeds(config);

  ScalingRow row;
  row.epsilon = epsilon;
  row.tau = setup.tau;
  row.budget = config.iterations;
  row.params = setup.resolved;
  row.censored = true;
  row.iterations_to_target = config.iterations;

  std::vector<double> errors(records.size()), calls(records.size());
  for (std::uint64_t k = 0; k <= config.iterations; ++k) {
    for (std::size_t s = 0; s < records.size(); ++s) {
      const auto& r = records[s];
      const std::size_t row_index = std::min<std::size_t>(k, r.rows() - 1);
      errors[s] = r.series(Metric::kDistSq)[row_index];
      calls[s] = static_cast<double>(r.oracle_calls[row_index]);
    }
    if (median(errors) <= target * d0) {
      row.censored = false;
      row.iterations_to_target = k;
      row.oracle_calls_to_target = median(calls);
      return row;
    }
  }
  row.oracle_calls_to_target = median(calls);
  return row;
}

}  // namespace

ScalingTable tau_scaling_study(const json& base, const std::vector<double>& epsilons,
                               double target) {
  if (epsilons.empty()) throw ConfigError("no epsilon values given");
  if (!(target > 0.0)) throw ConfigError("target must be positive");
  if (base.value("record_every", 1) != 1) {
    throw ConfigError("the scaling study records every iteration");
  }
  ScalingTable table;
  table.target = target;
  for (double e : epsilons) table.rows.push_back(study_point(base, e, target));

  std::vector<double> tau, calls;
  std::set<int> distinct;
  for (const auto& r : table.rows) {
    if (r.censored) continue;
    tau.push_back(r.tau);
    calls.push_back(r.oracle_calls_to_target);
    distinct.insert(r.tau);
  }
  if (distinct.size() >= 2) table.slope = fit_series(tau, calls, FitModel::kPowerLaw);
  return table;
}

json to_json(const ScalingTable& table) {
  json rows = json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"epsilon", r.epsilon},
                    {"tau", r.tau},
                    {"iterations_to_target", r.iterations_to_target},
                    {"oracle_calls_to_target", r.oracle_calls_to_target},
                    {"censored", r.censored},
                    {"budget", r.budget},
                    {"params", r.params}});
  }
  json j = {{"format", "markovopt-scaling"}, {"target", table.target}, {"rows", rows}};
  if (table.slope) {
    j["slope"] = {{"value", table.slope->slope},
                  {"intercept", table.slope->intercept},
                  {"half_width", table.slope->half_width},
                  {"residual", table.slope->residual}};
  }
  return j;
}

ScalingTable scaling_table_from_json(const json& j) {
  if (j.value("format", std::string()) != "markovopt-scaling") {
    throw ConfigError("not a scaling table");
  }
  ScalingTable t;
  t.target = j.at("target");
  for (const auto& r : j.at("rows")) {
    ScalingRow row;
    row.epsilon = r.at("epsilon");
    row.tau = r.at("tau");
    row.iterations_to_target = r.at("iterations_to_target");
    row.oracle_calls_to_target = r.at("oracle_calls_to_target");
    row.censored = r.at("censored");
    row.budget = r.at("budget");
    row.params = r.value("params", json::object());
    t.rows.push_back(std::move(row));
  }
  if (j.contains("slope")) {
    FitResult f;
    f.model = FitModel::kPowerLaw;
    f.slope = j.at("slope").at("value");
    f.intercept = j.at("slope").at("intercept");
    f.half_width = j.at("slope").at("half_width");
    f.residual = j.at("slope").at("residual");
    t.slope = f;
  }
  return t;
}

std::string scaling_csv(const ScalingTable& table) {
  std::string out = "epsilon,tau,iterations_to_target,oracle_calls_to_target,censored,budget\n";
  for (const auto& r : table.rows) {
    out += format_double(r.epsilon) + "," + std::to_string(r.tau) + "," +
           std::to_string(r.iterations_to_target) + "," +
           format_double(r.oracle_calls_to_target) + "," +
           (r.censored ? "1" : "0") + "," + std::to_string(r.budget) + "\n";
  }
  return out;
}

}  // namespace markovopt
