#include "markovopt/run_record.hpp"

#include <algorithm>

#include "markovopt/error.hpp"

namespace markovopt {

namespace {

struct NamedMetric {
  Metric metric;
  const char* name;
};

constexpr NamedMetric kNames[] = {
    {Metric::kDistSq, "dist_sq"},   {Metric::kSubopt, "subopt"},
    {Metric::kGradSq, "grad_sq"},   {Metric::kAvgGradSq, "avg_grad_sq"},
    {Metric::kGap, "gap"},          {Metric::kLyapunov, "lyapunov"},
};

}  // namespace

std::string metric_name(Metric metric) {
  for (const auto& m : kNames) {
    if (m.metric == metric) return m.name;
  }
  return "?";
}

Metric metric_from_name(const std::string& name) {
  for (const auto& m : kNames) {
    if (name == m.name) return m.metric;
  }
  throw ConfigError("unknown metric \"" + name + "\"");
}

std::vector<Metric> metrics_from_names(const std::vector<std::string>& names) {
  std::vector<Metric> out;
  for (const auto& n : names) out.push_back(metric_from_name(n));
  return out;
}

bool RunRecord::has(Metric metric) const {
  return std::find(metrics.begin(), metrics.end(), metric) != metrics.end();
}

const std::vector<double>& RunRecord::series(Metric metric) const {
  const auto it = std::find(metrics.begin(), metrics.end(), metric);
  if (it == metrics.end()) {
    throw ParameterError("run record has no metric " + metric_name(metric));
  }
  return values[static_cast<std::size_t>(it - metrics.begin())];
}

}  // namespace markovopt
