#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "markovopt/markov_chain.hpp"
#include "markovopt/mlmc.hpp"
#include "markovopt/oracles.hpp"
#include "markovopt/params.hpp"
#include "markovopt/problems.hpp"
#include "markovopt/run_record.hpp"

namespace markovopt {

struct StopRule {
  Metric metric = Metric::kDistSq;
  /// Stop once the recorded metric is <= threshold.
  double threshold = 0.0;
};

struct RunOptions {
  /// Empty selects every metric the problem supports.
  std::vector<Metric> metrics;
  std::uint64_t record_every = 1;
  /// Seed of the level generator (the chain has its own).
  std::uint64_t level_seed = 0;
  /// Verify the momentum-update identity every iteration (on by default in
  /// debug builds); a residual above 1e-10 (relative) throws.
  bool check_identity =
#ifdef NDEBUG
      false;
#else
      true;
#endif
  std::optional<StopRule> stop;
  /// Evaluate full truncated blocks (see EstimatorConfig).
  bool charge_truncated_levels = false;
};

/// Accelerated randomized-batch SGD. Requires mu > 0. x^0 = x_f^0 = x0.
RunRecord run_rasgd(const SmoothProblem& problem, const NoisyOracle& oracle,
                    ChainSampler& sampler, const RasgdParams& params,
                    const Vector& x0, const RunOptions& options = {});

struct RestartConfig {
  double L = 0.0;
  double mu = 0.0;
  double delta = 0.0;
  double tau = 1.0;
  double b = 1.0;
  /// Total iteration budget; restart t runs min(2^t, remaining) iterations.
  std::uint64_t budget = 0;
  /// Start every restart from x0 instead of warm-starting.
  bool same_start = false;
};

/// Stepsizes of one restart of length n: constant 3/(4L) for
/// k < ceil(n/2), then omega_k = 2 / (a (2/(a omega_max) + k - ceil(n/2)))
/// with omega = sqrt(gamma) and a = sqrt(p_l^2 mu / 3), p_l the value of p
/// at gamma = 3/(4L). Constant throughout when n <= 1/(a omega_max).
std::vector<double> restart_stepsizes(const RestartConfig& config,
                                      std::uint64_t n);

/// Restart schedule N_t = 2^t with per-iteration parameters recomputed from
/// the stepsize.
RunRecord run_rasgd_restarts(const SmoothProblem& problem,
                             const NoisyOracle& oracle, ChainSampler& sampler,
                             const RestartConfig& config, const Vector& x0,
                             const RunOptions& options = {});

/// Randomized gradient descent x+ = x - gamma g.
RunRecord run_randomized_gd(const SmoothProblem& problem,
                            const NoisyOracle& oracle, ChainSampler& sampler,
                            const RgdParams& params, const Vector& x0,
                            const RunOptions& options = {});

/// Randomized extragradient with prox steps. x0 is projected onto X.
RunRecord run_reg(const VIProblem& problem, const NoisyOracle& oracle,
                  ChainSampler& sampler, const RegParams& params,
                  const Vector& x0, const RunOptions& options = {});

/// ||x - x*||^2 + (6/mu)(f(x_f) - f*).
double lyapunov(const SmoothProblem& problem, const Vector& x, const Vector& x_f);

}  // namespace markovopt
