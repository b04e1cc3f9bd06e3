#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "markovopt/markov_chain.hpp"
#include "markovopt/problems.hpp"
#include "markovopt/types.hpp"

namespace markovopt {

/// Growth constants of an oracle.
///
/// Minimisation form: ||G(x,z) - grad f(x)||^2 <= sigma^2 + delta^2 ||grad f(x)||^2.
/// Operator form:     ||G(x,z) - F(x)||^2      <= sigma^2 + delta^2 ||x - x*||^2.
struct GrowthParams {
  double sigma = 0.0;
  double delta = 0.0;
  bool operator_form = false;
};

/// Deterministic map (x, z) -> vector with an intrinsic call meter.
///
/// All randomness lives in the chain. Evaluation is const and thread safe;
/// the meter is an atomic counter that every evaluated state increments by
/// exactly one.
class NoisyOracle {
 public:
  virtual ~NoisyOracle() = default;
  NoisyOracle(const NoisyOracle&) = delete;
  NoisyOracle& operator=(const NoisyOracle&) = delete;

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t state_count() const noexcept { return state_count_; }
  const GrowthParams& growth() const noexcept { return growth_; }
  /// Stationary law of the chain the oracle was built for.
  const Vector& stationary() const noexcept { return stationary_; }

  std::uint64_t call_count() const noexcept {
    return calls_.load(std::memory_order_relaxed);
  }
  void reset_call_count() noexcept { calls_.store(0, std::memory_order_relaxed); }

  void evaluate_into(const Vector& x, StateIndex z, Vector& out) const;
  Vector evaluate(const Vector& x, StateIndex z) const;
  /// sum += sum_i G(x, states[i]); charges `count` calls.
  void accumulate(const Vector& x, const StateIndex* states, std::size_t count,
                  Vector& sum) const;

  /// Exact stationary mean field sum_z pi_z G(x, z) (not metered).
  virtual void mean_into(const Vector& x, Vector& out) const = 0;
  Vector mean_field(const Vector& x) const;
  /// Right-hand side of the growth bound at x.
  double growth_bound(const Vector& x) const;
  /// ||grad f(x)||^2 (minimisation) or ||x - x*||^2 (operator form).
  virtual double growth_reference(const Vector& x) const = 0;
  /// True when the declared growth constants are proven analytically.
  virtual bool growth_proven() const { return true; }
  /// Point around which default probes are drawn.
  virtual Vector probe_center() const = 0;

  virtual nlohmann::json to_json() const = 0;

 protected:
  NoisyOracle(std::size_t dimension, const FiniteMarkovKernel& kernel,
              GrowthParams growth);

  virtual void evaluate_raw(const Vector& x, StateIndex z, Vector& out) const = 0;
  /// Default: loop over evaluate_raw.
  virtual void accumulate_raw(const Vector& x, const StateIndex* states,
                              std::size_t count, Vector& sum) const;
  void set_growth(GrowthParams growth) { growth_ = growth; }
  void check_state(StateIndex z) const;

 private:
  std::size_t dimension_;
  std::size_t state_count_;
  Vector stationary_;
  GrowthParams growth_;
  mutable std::atomic<std::uint64_t> calls_{0};
};

/// +1, -1, +1, ... over S states.
std::vector<int> alternating_signs(std::size_t states);
/// Lifts per-state labels of one factor of a Kronecker chain to the joint
/// chain (state (i, j) has index i * S2 + j).
std::vector<int> lift_to_kronecker(const std::vector<int>& labels,
                                   std::size_t first_states,
                                   std::size_t second_states, bool first_factor);

/// G(x, z) = W(z) grad f(x), W(z) = 2 diag(1{z=+1}, 1{z=-1}, 1{z=+1}, ...).
/// Coordinate i (0-based) is kept when parity(z) is +1 and i is even, or
/// parity(z) is -1 and i is odd. Requires even d; growth (0, 1).
class MaskedOracle final : public NoisyOracle {
 public:
  MaskedOracle(std::shared_ptr<const SmoothProblem> problem,
               const FiniteMarkovKernel& kernel, std::vector<int> parity);

  void mean_into(const Vector& x, Vector& out) const override;
  double growth_reference(const Vector& x) const override;
  Vector probe_center() const override;
  nlohmann::json to_json() const override;
  const SmoothProblem& problem() const noexcept { return *problem_; }

 protected:
  void evaluate_raw(const Vector& x, StateIndex z, Vector& out) const override;
  void accumulate_raw(const Vector& x, const StateIndex* states,
                      std::size_t count, Vector& sum) const override;

 private:
  std::shared_ptr<const SmoothProblem> problem_;
  std::vector<int> parity_;
  Vector mask_weight_;  // pi-mass of +1 states and -1 states, times 2
};

std::shared_ptr<MaskedOracle> masked_gradient_oracle(
    std::shared_ptr<const SmoothProblem> problem,
    const FiniteMarkovKernel& kernel, std::vector<int> parity = {});

/// G(x, z) = grad f(x) + (sigma/2) y(z) u with y in {+1, -1} and unit u.
/// The mean field carries (sigma/2) E_pi[y] u, which vanishes for
/// symmetric pi. The declared growth is the tight
/// (sigma/2) max_z |y(z) - E_pi y| with delta = 0.
class AdditiveNoiseOracle final : public NoisyOracle {
 public:
  AdditiveNoiseOracle(std::shared_ptr<const SmoothProblem> problem,
                      const FiniteMarkovKernel& kernel, double sigma,
                      std::vector<int> sign, Vector direction);

  void mean_into(const Vector& x, Vector& out) const override;
  double growth_reference(const Vector& x) const override;
  Vector probe_center() const override;
  nlohmann::json to_json() const override;
  const SmoothProblem& problem() const noexcept { return *problem_; }
  double noise_scale() const noexcept { return sigma_; }
  /// E_pi[y].
  double mean_sign() const noexcept { return mean_sign_; }

 protected:
  void evaluate_raw(const Vector& x, StateIndex z, Vector& out) const override;
  void accumulate_raw(const Vector& x, const StateIndex* states,
                      std::size_t count, Vector& sum) const override;

 private:
  std::shared_ptr<const SmoothProblem> problem_;
  double sigma_;
  std::vector<int> sign_;
  Vector direction_;
  double mean_sign_;
};

/// One-dimensional G(x, y) = mu (x - x*) + (sigma/2) y.
std::shared_ptr<AdditiveNoiseOracle> additive_noise_oracle(
    double mu, double x_star, double sigma, const FiniteMarkovKernel& kernel,
    std::vector<int> sign = {});

/// d-dimensional additive noise along a unit direction (default e1).
std::shared_ptr<AdditiveNoiseOracle> additive_noise_oracle(
    std::shared_ptr<const SmoothProblem> problem, double sigma,
    const FiniteMarkovKernel& kernel, std::vector<int> sign = {},
    Vector direction = Vector());

/// G(x, z) = phi(z) phi(z)^T (x - x*) with phi(z) a standard basis vector.
/// The mean is diag(s)(x - x*) with s the stationary feature masses;
/// growth (0, max(1, max_k |1/s_k - 1|)).
class LeastSquaresOracle final : public NoisyOracle {
 public:
  LeastSquaresOracle(const Vector& minimizer, const FiniteMarkovKernel& kernel,
                     std::vector<int> feature);

  void mean_into(const Vector& x, Vector& out) const override;
  double growth_reference(const Vector& x) const override;
  Vector probe_center() const override;
  nlohmann::json to_json() const override;
  const std::shared_ptr<QuadraticProblem>& problem() const noexcept {
    return problem_;
  }

 protected:
  void evaluate_raw(const Vector& x, StateIndex z, Vector& out) const override;

 private:
  Vector minimizer_;
  std::vector<int> feature_;
  std::shared_ptr<QuadraticProblem> problem_;
};

/// Default features: state 0 -> e1, state 1 -> e2.
std::shared_ptr<LeastSquaresOracle> markov_least_squares_oracle(
    const Vector& minimizer, const FiniteMarkovKernel& kernel,
    std::vector<int> feature = {});

/// G(x, z) = F(x) + s(z) (sigma + Delta ||x - x*||) u(z).
///
/// Construction requires sum_z pi_z s(z) u(z) = 0 so that the perturbation
/// has zero stationary mean. Declared operator-form growth is
/// (sqrt2 sigma, sqrt2 Delta).
class VIOperatorOracle final : public NoisyOracle {
 public:
  VIOperatorOracle(std::shared_ptr<const VIProblem> problem,
                   const FiniteMarkovKernel& kernel, double sigma,
                   double delta_op, std::vector<int> sign,
                   std::vector<Vector> direction);

  void mean_into(const Vector& x, Vector& out) const override;
  double growth_reference(const Vector& x) const override;
  Vector probe_center() const override;
  nlohmann::json to_json() const override;
  const VIProblem& problem() const noexcept { return *problem_; }
  double noise_sigma() const noexcept { return sigma_; }
  double noise_delta() const noexcept { return delta_op_; }

 protected:
  void evaluate_raw(const Vector& x, StateIndex z, Vector& out) const override;

 private:
  std::shared_ptr<const VIProblem> problem_;
  double sigma_;
  double delta_op_;
  std::vector<int> sign_;
  std::vector<Vector> direction_;
  Vector center_;
};

/// Defaults: alternating signs and e1 for every state.
std::shared_ptr<VIOperatorOracle> vi_operator_oracle(
    std::shared_ptr<const VIProblem> problem, const FiniteMarkovKernel& kernel,
    double sigma, double delta_op, std::vector<int> sign = {},
    std::vector<Vector> direction = {});

struct GrowthReport {
  double max_violation = 0.0;
  std::size_t probes = 0;
  /// False for user oracles whose bound is only sampled.
  bool proven = true;
  bool passed() const { return max_violation <= 1e-9; }
};

/// max over probes x and states z of
/// ||G(x,z) - mean(x)||^2 - (sigma^2 + delta^2 * reference(x)).
GrowthReport verify_growth(const NoisyOracle& oracle,
                           const std::vector<Vector>& probes);

/// sum_z pi_z G(x, z), evaluated through the meter.
Vector stationary_mean(const NoisyOracle& oracle, const Vector& x);

/// `count` points uniform in the ball of radius `radius` around `center`,
/// followed by 0 and `center`.
std::vector<Vector> default_probe_points(const Vector& center,
                                         std::size_t count, std::uint64_t seed,
                                         double radius = 10.0);

/// Builds an oracle from {"kind": "masked" | "additive" | "least_squares"}.
std::shared_ptr<NoisyOracle> smooth_oracle_from_json(
    const nlohmann::json& j, std::shared_ptr<const SmoothProblem> problem,
    const FiniteMarkovKernel& kernel);
/// Builds a VI oracle from {"kind": "vi_operator", "sigma", "delta"}.
std::shared_ptr<NoisyOracle> vi_oracle_from_json(
    const nlohmann::json& j, std::shared_ptr<const VIProblem> problem,
    const FiniteMarkovKernel& kernel);

}  // namespace markovopt
