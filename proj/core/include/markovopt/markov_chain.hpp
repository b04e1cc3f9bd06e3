#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "markovopt/rng.hpp"
#include "markovopt/types.hpp"

namespace markovopt {

/// Row-stochastic transition matrix over states {0, ..., S-1}.
///
/// Immutable after construction. The constructor rejects matrices with
/// entries outside [0, 1] or rows that do not sum to 1 within 1e-12.
class FiniteMarkovKernel {
 public:
  static constexpr double kRowSumTolerance = 1e-12;

  explicit FiniteMarkovKernel(Matrix transitions);

  std::size_t state_count() const noexcept {
    return static_cast<std::size_t>(transitions_.rows());
  }
  const Matrix& matrix() const noexcept { return transitions_; }
  double operator()(StateIndex from, StateIndex to) const {
    return transitions_(static_cast<Eigen::Index>(from),
                        static_cast<Eigen::Index>(to));
  }

  /// Q^t for t >= 0 (binary exponentiation).
  Matrix power(std::uint64_t t) const;

  /// Cumulative row sums used for inverse-CDF sampling; last entry is 1.
  const std::vector<double>& cumulative_row(StateIndex from) const {
    return cumulative_[from];
  }

  friend bool operator==(const FiniteMarkovKernel& a,
                         const FiniteMarkovKernel& b) {
    return a.transitions_ == b.transitions_;
  }

 private:
  Matrix transitions_;
  std::vector<std::vector<double>> cumulative_;
};

/// tau together with Dobrushin(Q^t) for t = 0, ..., tau.
struct MixingProfile {
  int tau = 0;
  /// Indexed by the power t; entry 0 is Dobrushin(I).
  std::vector<double> dobrushin_by_power;
};

/// [[1-eps, eps], [eps, 1-eps]] for eps in (0, 1/2).
FiniteMarkovKernel two_state_kernel(double epsilon);

/// [[1-eps, eps], [eps+phi, 1-eps-phi]] for eps in (0, 1/4), phi in [0, eps].
FiniteMarkovKernel perturbed_two_state_kernel(double epsilon, double phi);

/// Two-state kernel with stationary law (1 - 1/Q, 1/Q):
/// [[1 - eps/(Q-1), eps/(Q-1)], [eps, 1-eps]], Q > 1, eps in (0, 1/4).
FiniteMarkovKernel regression_kernel(double condition_number, double epsilon);

/// Joint kernel of two independent chains; state (i, j) has index
/// i * S2 + j.
FiniteMarkovKernel kronecker_kernel(const FiniteMarkovKernel& first,
                                    const FiniteMarkovKernel& second);

/// Unique invariant law pi with pi Q = pi. Throws ErgodicityError when the
/// stationary distribution is not unique.
Vector stationary_distribution(const FiniteMarkovKernel& kernel);

/// max_{z,z'} (1/2) || Q^power(z, .) - Q^power(z', .) ||_1.
double dobrushin_coefficient(const FiniteMarkovKernel& kernel,
                             std::uint64_t power);
double dobrushin_coefficient(const Matrix& transitions);

/// Smallest t >= 1 with Dobrushin(Q^t) <= 1/4. Submultiplicativity then
/// gives Dobrushin(Q^k) <= (1/4)^floor(k / tau) for every k.
MixingProfile mixing_time(const FiniteMarkovKernel& kernel, int max_power);

/// Loose closed-form bound ceil(ln 4 / eps) for two_state_kernel(eps).
int two_state_mixing_bound(double epsilon);

/// Single-owner sampler for a trajectory of the chain.
///
/// By default the initial state is drawn from the stationary law; the
/// states consumed by callers are the ones returned by `sample_next`.
class ChainSampler {
 public:
  ChainSampler(std::shared_ptr<const FiniteMarkovKernel> kernel,
               std::uint64_t seed);
  ChainSampler(std::shared_ptr<const FiniteMarkovKernel> kernel,
               std::uint64_t seed, StateIndex initial_state);

  /// Draws the next state from row `current_state()` and moves there.
  StateIndex sample_next();

  /// Moves `steps` states forward without reporting the intermediate ones.
  /// Long jumps draw directly from a row of Q^steps.
  void advance(std::uint64_t steps);

  StateIndex current_state() const noexcept { return current_; }
  std::uint64_t steps_taken() const noexcept { return steps_; }
  const FiniteMarkovKernel& kernel() const noexcept { return *kernel_; }
  const std::shared_ptr<const FiniteMarkovKernel>& kernel_ptr() const noexcept {
    return kernel_;
  }

 private:
  StateIndex draw_from(const double* cumulative, std::size_t count);

  std::shared_ptr<const FiniteMarkovKernel> kernel_;
  Rng rng_;
  StateIndex current_ = 0;
  std::uint64_t steps_ = 0;
};

void to_json(nlohmann::json& j, const FiniteMarkovKernel& kernel);
FiniteMarkovKernel kernel_from_json(const nlohmann::json& j);

}  // namespace markovopt
