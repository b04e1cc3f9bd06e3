#pragma once

#include <cstdint>
#include <memory>
#include <optional>

#include "markovopt/markov_chain.hpp"
#include "markovopt/oracles.hpp"
#include "markovopt/rng.hpp"
#include "markovopt/types.hpp"

namespace markovopt {

/// Randomized-batch estimator settings. Levels are geometric with
/// P(J = j) = 2^-j, j >= 1.
struct EstimatorConfig {
  std::uint64_t B = 1;
  double M = 2.0;
  /// Evaluate every state of a truncated block instead of only advancing
  /// the chain past it. The expected cost is then unbounded.
  bool charge_truncated_levels = false;

  void validate() const;
  /// floor(log2 M).
  int max_level() const;
};

struct GradientEstimate {
  Vector vector;
  int level = 1;
  bool truncated = false;
  std::uint64_t oracle_calls = 0;
  /// 2^J * B, saturating at UINT64_MAX.
  std::uint64_t chain_advance = 0;
};

int sample_level(Rng& rng);

/// g0 + 2^J (gJ - g_{J-1}) when not truncated, else g0.
Vector combine_levels(const Vector& g0, const Vector& g_previous,
                      const Vector& g_level, int level, bool truncated);

/// Draws J and evaluates the estimator at x on the next 2^J B states.
GradientEstimate mlmc_gradient(const NoisyOracle& oracle, ChainSampler& sampler,
                               const Vector& x, const EstimatorConfig& cfg,
                               Rng& rng);

/// Same estimator with the level fixed.
GradientEstimate mlmc_gradient_at_level(const NoisyOracle& oracle,
                                        ChainSampler& sampler, const Vector& x,
                                        const EstimatorConfig& cfg, int level);

struct BatchMean {
  Vector vector;
  std::uint64_t oracle_calls = 0;
};

/// Mean of the oracle over the next n states.
BatchMean batch_mean(const NoisyOracle& oracle, ChainSampler& sampler,
                     const Vector& x, std::uint64_t n);

/// Expected oracle calls per estimate, B (m + 2^-m) with m = floor(log2 M).
/// Ignores charge_truncated_levels.
double expected_cost(const EstimatorConfig& cfg);

struct BiasVarianceOptions {
  std::uint64_t trials = 100000;
  std::uint64_t seed = 0;
  /// Fixed start state; stationary start when empty.
  std::optional<StateIndex> initial_state;
  /// Pair each trial with a stationary twin chain driven by the same
  /// uniforms and the same level, and use its estimate (mean grad f) as a
  /// control variate for the bias.
  bool coupled_control = false;
  unsigned threads = 1;
};

struct BiasVariance {
  /// ||grad f(x) - E g||^2, debiased by the trace of the mean's covariance.
  double bias_sq = 0.0;
  double bias_sq_se = 0.0;
  /// E ||g - grad f(x)||^2.
  double variance = 0.0;
  double variance_se = 0.0;
  Vector mean;
  std::uint64_t trials = 0;
};

/// Monte Carlo bias and mean squared error of the estimator at x with
/// respect to the oracle's stationary mean field. Trials are grouped in
/// fixed chunks with independent streams and reduced in chunk order, so
/// the result does not depend on the thread count.
BiasVariance measure_bias_variance(const NoisyOracle& oracle,
                                   std::shared_ptr<const FiniteMarkovKernel> kernel,
                                   const Vector& x, const EstimatorConfig& cfg,
                                   const BiasVarianceOptions& options);

}  // namespace markovopt
