#include "markovopt/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "markovopt/error.hpp"
#include "markovopt/rng.hpp"

namespace markovopt {

double lyapunov(const SmoothProblem& problem, const Vector& x, const Vector& x_f) {
  if (!problem.minimizer() || !problem.optimal_value() ||
      !(problem.strong_convexity() > 0.0)) {
    throw ParameterError("lyapunov: needs x*, f* and mu > 0");
  }
  return (x - *problem.minimizer()).squaredNorm() +
         6.0 / problem.strong_convexity() *
             (problem.value(x_f) - *problem.optimal_value());
}

namespace {

void check_dimension(std::size_t problem_dim, const NoisyOracle& oracle,
                     const Vector& x0) {
  if (oracle.dimension() != problem_dim ||
      static_cast<std::size_t>(x0.size()) != problem_dim) {
    throw ParameterError("dimension mismatch between problem, oracle and x0");
  }
}

void check_finite(const Vector& v, std::uint64_t k) {
  if (!v.allFinite()) throw DivergenceError(k);
}

/// Records the smooth-problem metrics.
class SmoothRecorder {
 public:
  SmoothRecorder(const SmoothProblem& problem, const RunOptions& options,
                 bool lyapunov_allowed)
      : problem_(problem), options_(options) {
    const bool solution = problem.minimizer().has_value();
    const bool value = problem.optimal_value().has_value();
    const bool sc = problem.strong_convexity() > 0.0;
    auto supported = [&](Metric m) {
      switch (m) {
        case Metric::kDistSq:
          return solution;
        case Metric::kSubopt:
          return value;
        case Metric::kGradSq:
        case Metric::kAvgGradSq:
          return true;
        case Metric::kLyapunov:
          return lyapunov_allowed && solution && value && sc;
        case Metric::kGap:
          return false;
      }
      return false;
    };
    if (options.metrics.empty()) {
      for (Metric m : {Metric::kDistSq, Metric::kSubopt, Metric::kGradSq,
                       Metric::kAvgGradSq, Metric::kLyapunov}) {
        if (supported(m)) record_.metrics.push_back(m);
      }
    } else {
      for (Metric m : options.metrics) {
        if (!supported(m)) {
          throw ParameterError("metric " + metric_name(m) +
                               " is not available for this problem/method");
        }
        record_.metrics.push_back(m);
      }
    }
    record_.values.resize(record_.metrics.size());
    if (options.record_every == 0) {
      throw ParameterError("record_every must be >= 1");
    }
  }

  /// Must be called for every k (grad average needs all iterates); rows
  /// are written when due. Returns true when the stop rule fires.
  bool observe(std::uint64_t k, std::uint64_t calls, const Vector& x,
               const Vector& x_f, bool force) {
    const double grad_sq = problem_.gradient(x_f).squaredNorm();
    grad_sum_ += grad_sq;
    ++grad_count_;
    if (!force && k % options_.record_every != 0) return false;
    record_.iteration.push_back(k);
    record_.oracle_calls.push_back(calls);
    bool stop = false;
    for (std::size_t i = 0; i < record_.metrics.size(); ++i) {
      const Metric m = record_.metrics[i];
      double v = 0.0;
      switch (m) {
        case Metric::kDistSq:
          v = (x - *problem_.minimizer()).squaredNorm();
          break;
        case Metric::kSubopt:
          v = problem_.value(x_f) - *problem_.optimal_value();
          break;
        case Metric::kGradSq:
          v = grad_sq;
          break;
        case Metric::kAvgGradSq:
          v = grad_sum_ / static_cast<double>(grad_count_);
          break;
        case Metric::kLyapunov:
          v = lyapunov(problem_, x, x_f);
          break;
        case Metric::kGap:
          break;
      }
      record_.values[i].push_back(v);
      if (options_.stop && options_.stop->metric == m &&
          v <= options_.stop->threshold) {
        stop = true;
      }
    }
    return stop;
  }

  RunRecord& record() { return record_; }

 private:
  const SmoothProblem& problem_;
  const RunOptions& options_;
  RunRecord record_;
  double grad_sum_ = 0.0;
  std::uint64_t grad_count_ = 0;
};

struct RasgdState {
  Vector x;
  Vector x_f;
};

/// One accelerated step; returns the identity residual (0 when unchecked).
double rasgd_step(const NoisyOracle& oracle, ChainSampler& sampler,
                  const RasgdParams& p, const EstimatorConfig& cfg, Rng& rng,
                  bool check, RasgdState& s, RunRecord& record) {
  const Vector x_g = p.theta * s.x_f + (1.0 - p.theta) * s.x;
  const GradientEstimate est = mlmc_gradient(oracle, sampler, x_g, cfg, rng);
  record.total_oracle_calls += est.oracle_calls;
  record.total_chain_advance += est.chain_advance;
  const Vector& g = est.vector;

  Vector x_f_next = x_g - (p.p * p.gamma) * g;
  Vector x_next = p.eta * x_f_next + (p.p - p.eta) * s.x_f +
                  ((1.0 - p.p) * (1.0 - p.beta)) * s.x +
                  ((1.0 - p.p) * p.beta) * x_g;
  double residual = 0.0;
  if (check) {
    const Vector alt = p.beta * x_g + (1.0 - p.beta) * s.x - (p.eta * p.p * p.gamma) * g;
    const double scale = 1.0 + std::max({x_next.norm(), x_g.norm(), s.x.norm(),
                                         s.x_f.norm()}) * std::max(1.0, p.eta);
    residual = (x_next - alt).norm() / scale;
    if (residual > 1e-10) {
      throw Error("momentum update identity violated (residual " +
                  std::to_string(residual) + ")");
    }
  }
  s.x = std::move(x_next);
  s.x_f = std::move(x_f_next);
  return residual;
}

}  // namespace

RunRecord run_rasgd(const SmoothProblem& problem, const NoisyOracle& oracle,
                    ChainSampler& sampler, const RasgdParams& params,
                    const Vector& x0, const RunOptions& options) {
  check_dimension(problem.dimension(), oracle, x0);
  if (!(problem.strong_convexity() > 0.0)) {
    throw ParameterError("accelerated method needs mu > 0");
  }
  SmoothRecorder recorder(problem, options, true);
  RunRecord& record = recorder.record();
  EstimatorConfig cfg = params.estimator();
  cfg.charge_truncated_levels = options.charge_truncated_levels;
  Rng rng(options.level_seed);

  RasgdState s{x0, x0};
  bool stop = recorder.observe(0, 0, s.x, s.x_f, true);
  for (std::uint64_t k = 1; k <= params.N && !stop; ++k) {
    const double r = rasgd_step(oracle, sampler, params, cfg, rng,
                                options.check_identity, s, record);
    record.identity_residual = std::max(record.identity_residual, r);
    record.gamma.push_back(params.gamma);
    check_finite(s.x, k - 1);
    check_finite(s.x_f, k - 1);
    stop = recorder.observe(k, record.total_oracle_calls, s.x, s.x_f, k == params.N);
  }
  record.stopped_early = stop && record.iteration.back() < params.N;
  record.final_x = s.x;
  record.final_x_f = s.x_f;
  return std::move(record);
}

std::vector<double> restart_stepsizes(const RestartConfig& c, std::uint64_t n) {
  const double gamma_max = rasgd_max_gamma(c.L);
  const double omega_max = std::sqrt(gamma_max);
  const double p_l = rasgd_p(c.L, c.delta, c.tau, c.b, gamma_max);
  const double a = std::sqrt(p_l * p_l * c.mu / 3.0);
  std::vector<double> gammas(n, gamma_max);
  if (static_cast<double>(n) <= 1.0 / (a * omega_max)) return gammas;
  const std::uint64_t k0 = (n + 1) / 2;
  const double kappa = 2.0 / (a * omega_max);
  for (std::uint64_t k = k0; k < n; ++k) {
    const double omega = 2.0 / (a * (kappa + static_cast<double>(k - k0)));
    gammas[k] = std::min(gamma_max, omega * omega);
  }
  return gammas;
}

RunRecord run_rasgd_restarts(const SmoothProblem& problem,
                             const NoisyOracle& oracle, ChainSampler& sampler,
                             const RestartConfig& config, const Vector& x0,
                             const RunOptions& options) {
  check_dimension(problem.dimension(), oracle, x0);
  if (!(problem.strong_convexity() > 0.0)) {
    throw ParameterError("accelerated method needs mu > 0");
  }
  if (config.budget == 0) throw ParameterError("restart budget must be >= 1");
  SmoothRecorder recorder(problem, options, true);
  RunRecord& record = recorder.record();
  Rng rng(options.level_seed);

  RasgdState s{x0, x0};
  bool stop = recorder.observe(0, 0, s.x, s.x_f, true);
  std::uint64_t k = 0;
  for (int t = 0; k < config.budget && !stop; ++t) {
    const std::uint64_t length =
        std::min<std::uint64_t>(std::uint64_t{1} << std::min(t, 62),
                                config.budget - k);
    const std::vector<double> gammas = restart_stepsizes(config, length);
    record.restart_starts.push_back(k);
    if (t > 0) {
      if (config.same_start) {
        s = {x0, x0};
      } else {
        s.x = s.x_f;
      }
    }
    for (std::uint64_t i = 0; i < length && !stop; ++i) {
      const RasgdParams p = rasgd_params(config.L, config.mu, config.delta,
                                         config.tau, config.b, gammas[i], length);
      EstimatorConfig cfg = p.estimator();
      cfg.charge_truncated_levels = options.charge_truncated_levels;
      const double r = rasgd_step(oracle, sampler, p, cfg, rng,
                                  options.check_identity, s, record);
      record.identity_residual = std::max(record.identity_residual, r);
      record.gamma.push_back(p.gamma);
      ++k;
      check_finite(s.x, k - 1);
      check_finite(s.x_f, k - 1);
      stop = recorder.observe(k, record.total_oracle_calls, s.x, s.x_f,
                              k == config.budget);
    }
  }
  record.stopped_early = stop && k < config.budget;
  record.final_x = s.x;
  record.final_x_f = s.x_f;
  return std::move(record);
}

RunRecord run_randomized_gd(const SmoothProblem& problem,
                            const NoisyOracle& oracle, ChainSampler& sampler,
                            const RgdParams& params, const Vector& x0,
                            const RunOptions& options) {
  check_dimension(problem.dimension(), oracle, x0);
  SmoothRecorder recorder(problem, options, true);
  RunRecord& record = recorder.record();
  EstimatorConfig cfg = params.estimator();
  cfg.charge_truncated_levels = options.charge_truncated_levels;
  Rng rng(options.level_seed);

  Vector x = x0;
  bool stop = recorder.observe(0, 0, x, x, true);
  for (std::uint64_t k = 1; k <= params.N && !stop; ++k) {
    const GradientEstimate est = mlmc_gradient(oracle, sampler, x, cfg, rng);
    record.total_oracle_calls += est.oracle_calls;
    record.total_chain_advance += est.chain_advance;
    x -= params.gamma * est.vector;
    record.gamma.push_back(params.gamma);
    check_finite(x, k - 1);
    stop = recorder.observe(k, record.total_oracle_calls, x, x, k == params.N);
  }
  record.stopped_early = stop && record.iteration.back() < params.N;
  record.final_x = x;
  record.final_x_f = x;
  return std::move(record);
}

RunRecord run_reg(const VIProblem& problem, const NoisyOracle& oracle,
                  ChainSampler& sampler, const RegParams& params,
                  const Vector& x0, const RunOptions& options) {
  check_dimension(problem.dimension(), oracle, x0);
  const bool monotone = params.mode == RegParams::Mode::kMonotone;
  const double mu = problem.strong_monotonicity() + problem.composite_strong_convexity();
  if (!monotone && !(mu > 0.0)) {
    throw ParameterError("strongly monotone mode needs mu_F + mu_r > 0");
  }
  const bool gap_ok = problem.feasible_set().bounded() && problem.affine() != nullptr;
  if (monotone && !problem.feasible_set().bounded()) {
    throw ParameterError("monotone mode needs a bounded feasible set");
  }
  if (options.record_every == 0) throw ParameterError("record_every must be >= 1");

  RunRecord record;
  if (options.metrics.empty()) {
    if (problem.solution()) record.metrics.push_back(Metric::kDistSq);
    if (gap_ok) record.metrics.push_back(Metric::kGap);
  } else {
    for (Metric m : options.metrics) {
      const bool ok = (m == Metric::kDistSq && problem.solution()) ||
                      (m == Metric::kGap && gap_ok);
      if (!ok) {
        throw ParameterError("metric " + metric_name(m) +
                             " is not available for this VI");
      }
      record.metrics.push_back(m);
    }
  }
  record.values.resize(record.metrics.size());

  const FeasibleSet& set = problem.feasible_set();
  const Composite& r = problem.composite();
  EstimatorConfig cfg = params.estimator();
  cfg.charge_truncated_levels = options.charge_truncated_levels;
  Rng rng(options.level_seed);

  Vector x = set.project(x0);
  Vector avg = Vector::Zero(x.size());
  std::uint64_t averaged = 0;

  auto observe = [&](std::uint64_t k, bool force) {
    if (!force && k % options.record_every != 0) return false;
    record.iteration.push_back(k);
    record.oracle_calls.push_back(record.total_oracle_calls);
    bool stop = false;
    for (std::size_t i = 0; i < record.metrics.size(); ++i) {
      const Metric m = record.metrics[i];
      double v = 0.0;
      if (m == Metric::kDistSq) {
        v = (x - *problem.solution()).squaredNorm();
      } else {
        v = gap(problem, averaged > 0 ? Vector(avg / static_cast<double>(averaged))
                                      : x);
      }
      record.values[i].push_back(v);
      if (options.stop && options.stop->metric == m &&
          v <= options.stop->threshold) {
        stop = true;
      }
    }
    return stop;
  };

  bool stop = observe(0, true);
  Vector half;
  for (std::uint64_t k = 1; k <= params.N && !stop; ++k) {
    const BatchMean extra = batch_mean(oracle, sampler, x, params.B);
    record.total_oracle_calls += extra.oracle_calls;
    record.total_chain_advance += params.B;
    half = prox(r, params.gamma, x - params.gamma * extra.vector, set);

    const GradientEstimate est = mlmc_gradient(oracle, sampler, half, cfg, rng);
    record.total_oracle_calls += est.oracle_calls;
    record.total_chain_advance += est.chain_advance;
    x = prox(r, params.gamma, x - params.gamma * est.vector, set);
    record.gamma.push_back(params.gamma);
    check_finite(half, k - 1);
    check_finite(x, k - 1);

    avg += half;
    ++averaged;
    stop = observe(k, k == params.N);
  }
  record.stopped_early = stop && record.iteration.back() < params.N;
  record.final_x = x;
  record.final_x_f = averaged > 0 ? Vector(avg / static_cast<double>(averaged)) : x;
  return record;
}

}  // namespace markovopt
