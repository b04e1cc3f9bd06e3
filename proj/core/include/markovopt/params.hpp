#pragma once

#include <cstdint>

#include "markovopt/mlmc.hpp"

namespace markovopt {

/// 16 (1 + 1 / ln^2 4).
extern const double kC1;
/// 256 / 3.
inline constexpr double kC2 = 256.0 / 3.0;

/// C1 tau / b + (C1 + 1) tau^2 / b^2.
double markov_variance_factor(double tau, double b);

/// Accelerated method parameters.
struct RasgdParams {
  double gamma = 0.0;
  double p = 0.0;
  double beta = 0.0;
  double eta = 0.0;
  double theta = 0.0;
  double M = 2.0;
  std::uint64_t B = 1;
  double b = 1.0;
  std::uint64_t N = 0;

  double L = 0.0;
  double mu = 0.0;
  double delta = 0.0;
  double tau = 1.0;

  EstimatorConfig estimator() const { return {B, M, false}; }
  /// Per-step contraction factor 1 - beta/2 of the Lyapunov function.
  double contraction() const { return 1.0 - 0.5 * beta; }
};

/// p = [1 + 2 (1 + gamma L)(1 + 4 [C1 tau/b + (C1+1) tau^2/b^2] delta^2)]^-1.
double rasgd_p(double L, double delta, double tau, double b, double gamma);

/// Every derived constant for gamma in (0, 3/(4L)]. Throws ParameterError
/// outside the range or within 1e-9 of the theta singularity.
RasgdParams rasgd_params(double L, double mu, double delta, double tau, double b,
                         double gamma, std::uint64_t N);

/// Largest admissible stepsize 3/(4L).
double rasgd_max_gamma(double L);

/// Horizon-dependent stepsize
/// min{3/(4L), ln(max{2, mu^2 N r0 / sigma^2}) / (p^2 mu N^2)}.
/// The ratio is capped at `ratio_cap` (sigma = 0 gives the cap).
double rasgd_gamma_for_horizon(double L, double mu, double p, std::uint64_t N,
                               double sigma, double r0, double ratio_cap = 1e12);

/// Right-hand side of the accelerated bound at N with explicit constants:
/// exp(-N sqrt(p^2 mu gamma / 3)) r0 + floor.
double rasgd_bound(const RasgdParams& params, double sigma, double r0);
/// 144 p sqrt(gamma) / (sqrt3 mu^{3/2}) (C1 sigma^2 tau/b + (C1+1) sigma^2 tau^2/b^2).
double rasgd_floor(const RasgdParams& params, double sigma);

/// Randomized gradient descent parameters.
struct RgdParams {
  double gamma = 0.0;
  double M = 2.0;
  std::uint64_t B = 1;
  double b = 1.0;
  std::uint64_t N = 0;
  double L = 0.0;
  double delta = 0.0;
  double tau = 1.0;

  EstimatorConfig estimator() const { return {B, M, false}; }
};

/// [4L (1 + 4 [C1 tau/b + (C1+1) tau^2/b^2] delta^2)]^-1.
double rgd_max_gamma(double L, double delta, double tau, double b);

/// M = max{2, sqrt(C2 / (gamma L))}, B = ceil(b log2 M).
RgdParams rgd_params(double L, double delta, double tau, double b, double gamma,
                     std::uint64_t N);

/// 4 (f0 - f*) / (gamma N) + 16 L gamma [C1 sigma^2 tau/B log2 M
/// + (C2 + 1) sigma^2 tau^2 / B^2].
double rgd_bound(const RgdParams& params, double sigma, double f_gap0);

/// Stepsize under the PL condition, capped by rgd_max_gamma:
/// min{1/((1+delta^2) L), ln(max{2, mu^2 N (f0 - f*) / (L sigma^2)}) / (mu N)}.
double pl_gamma(double L, double mu, double delta, double tau, double b,
                std::uint64_t N, double sigma, double f_gap0,
                double ratio_cap = 1e12);

/// exp(-mu gamma N / 2)(f0 - f*) + 8 L gamma / mu
/// (C1 tau/B log2 M + (C1 + 1) tau^2/B^2) sigma^2.
double pl_bound(const RgdParams& params, double mu, double sigma,
                double f_gap0);
/// Noise floor of pl_bound.
double pl_floor(const RgdParams& params, double mu, double sigma);

/// Extragradient parameters.
struct RegParams {
  enum class Mode { kStronglyMonotone, kMonotone };

  Mode mode = Mode::kStronglyMonotone;
  double gamma = 0.0;
  double M = 2.0;
  std::uint64_t B = 1;
  double b = 1.0;
  std::uint64_t N = 0;

  EstimatorConfig estimator() const { return {B, M, false}; }
};

/// min{(3 mu)^-1, (3L)^-1, (6 mu_F + mu_r)[120 (C1 tau/b + (C1+1) tau^2/b^2)
/// Delta^2]^-1, sqrt(b / (18 C1 Delta^2 tau))} with mu = mu_F + mu_r; terms
/// with Delta = 0 are dropped.
double reg_max_gamma(double L, double mu_f, double mu_r, double delta_op,
                     double tau, double b);

/// Strongly monotone mode: M = max{2, sqrt(C2 / (gamma mu))}, B = ceil(b log2 M).
/// gamma <= 0 selects reg_max_gamma.
RegParams reg_params_strongly_monotone(double L, double mu_f, double mu_r,
                                       double delta_op, double tau, double b,
                                       double gamma, std::uint64_t N);

/// Monotone mode: gamma <= 1/(3L) (gamma <= 0 selects 1/(3L)),
/// M = max{2, sqrt N}, B free (defaults to ceil(tau)).
RegParams reg_params_monotone(double L, double tau, std::uint64_t N,
                              double gamma = 0.0, std::uint64_t B = 0);

/// Contraction exponent predicted for the strongly monotone mode:
/// gamma (mu_F + mu_r) / divisor (2 in the headline statement, 16 in the
/// detailed one).
double reg_rate(double gamma, double mu_f, double mu_r, double divisor);

}  // namespace markovopt
