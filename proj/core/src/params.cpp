#include "markovopt/params.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "markovopt/error.hpp"

namespace markovopt {

namespace {

const double kLn4 = std::log(4.0);

std::uint64_t batch_for(double b, double M) {
  return static_cast<std::uint64_t>(std::ceil(b * std::log2(M) - 1e-12));
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ParameterError(std::string(what) + " must be finite and > 0");
  }
}

void require_chain(double tau, double b) {
  if (!(tau >= 1.0)) throw ParameterError("tau must be >= 1");
  if (!(b >= 1.0)) throw ParameterError("b must be >= 1");
}

double capped_log(double ratio, double cap) {
  if (!(ratio <= cap)) ratio = cap;  // also catches inf and nan from 0/0
  return std::log(std::max(2.0, ratio));
}

}  // namespace

const double kC1 = 16.0 * (1.0 + 1.0 / (kLn4 * kLn4));

double markov_variance_factor(double tau, double b) {
  return kC1 * tau / b + (kC1 + 1.0) * tau * tau / (b * b);
}

double rasgd_p(double L, double delta, double tau, double b, double gamma) {
  return 1.0 / (1.0 + 2.0 * (1.0 + gamma * L) *
                          (1.0 + 4.0 * markov_variance_factor(tau, b) * delta * delta));
}

double rasgd_max_gamma(double L) { return 0.75 / L; }

RasgdParams rasgd_params(double L, double mu, double delta, double tau, double b,
                         double gamma, std::uint64_t N) {
  require_positive(L, "L");
  require_positive(mu, "mu");
  require_chain(tau, b);
  if (!(delta >= 0.0)) throw ParameterError("delta must be >= 0");
  if (!(gamma > 0.0) || gamma > rasgd_max_gamma(L) * (1.0 + 1e-12)) {
    throw ParameterError("gamma must lie in (0, 3/(4L)]");
  }
  RasgdParams r;
  r.gamma = gamma;
  r.L = L;
  r.mu = mu;
  r.delta = delta;
  r.tau = tau;
  r.b = b;
  r.N = N;
  r.p = rasgd_p(L, delta, tau, b, gamma);
  r.beta = std::sqrt(4.0 * r.p * r.p * mu * gamma / 3.0);
  r.eta = std::sqrt(3.0 / (mu * gamma));
  const double ratio = r.p / r.eta;
  const double denom = r.beta * ratio - 1.0;
  if (std::abs(denom) < 1e-9) {
    throw ParameterError("theta is singular (beta p / eta within 1e-9 of 1)");
  }
  r.theta = (ratio - 1.0) / denom;
  if (r.beta > 1.0) throw ParameterError("beta exceeds 1");
  r.M = std::max(2.0, std::sqrt(kC2 / r.p * (1.0 + 2.0 * r.p / r.beta)));
  r.B = batch_for(b, r.M);
  return r;
}

double rasgd_gamma_for_horizon(double L, double mu, double p, std::uint64_t N,
                               double sigma, double r0, double ratio_cap) {
  require_positive(L, "L");
  require_positive(mu, "mu");
  require_positive(p, "p");
  if (N == 0) throw ParameterError("N must be >= 1");
  if (!(r0 >= 0.0)) throw ParameterError("r0 must be >= 0");
  const double n = static_cast<double>(N);
  const double ratio = mu * mu * n * r0 / (sigma * sigma);
  const double second = capped_log(ratio, ratio_cap) / (p * p * mu * n * n);
  return std::min(rasgd_max_gamma(L), second);
}

double rasgd_floor(const RasgdParams& params, double sigma) {
  const double s2 = sigma * sigma;
  return 144.0 * params.p * std::sqrt(params.gamma) /
         (std::sqrt(3.0) * std::pow(params.mu, 1.5)) *
         (kC1 * s2 * params.tau / params.b +
          (kC1 + 1.0) * s2 * params.tau * params.tau / (params.b * params.b));
}

double rasgd_bound(const RasgdParams& params, double sigma, double r0) {
  const double rate = std::sqrt(params.p * params.p * params.mu * params.gamma / 3.0);
  return std::exp(-static_cast<double>(params.N) * rate) * r0 +
         rasgd_floor(params, sigma);
}

double rgd_max_gamma(double L, double delta, double tau, double b) {
  require_positive(L, "L");
  require_chain(tau, b);
  return 1.0 / (4.0 * L * (1.0 + 4.0 * markov_variance_factor(tau, b) * delta * delta));
}

RgdParams rgd_params(double L, double delta, double tau, double b, double gamma,
                     std::uint64_t N) {
  const double cap = rgd_max_gamma(L, delta, tau, b);
  if (!(gamma > 0.0) || gamma > cap * (1.0 + 1e-12)) {
    throw ParameterError("gamma must lie in (0, [4L(1 + 4(...)delta^2)]^-1]");
  }
  RgdParams r;
  r.gamma = gamma;
  r.L = L;
  r.delta = delta;
  r.tau = tau;
  r.b = b;
  r.N = N;
  r.M = std::max(2.0, std::sqrt(kC2 / (gamma * L)));
  r.B = batch_for(b, r.M);
  return r;
}

double rgd_bound(const RgdParams& params, double sigma, double f_gap0) {
  const double s2 = sigma * sigma;
  const double big_b = static_cast<double>(params.B);
  return 4.0 * f_gap0 / (params.gamma * static_cast<double>(params.N)) +
         16.0 * params.L * params.gamma *
             (kC1 * s2 * params.tau / big_b * std::log2(params.M) +
              (kC2 + 1.0) * s2 * params.tau * params.tau / (big_b * big_b));
}

double pl_gamma(double L, double mu, double delta, double tau, double b,
                std::uint64_t N, double sigma, double f_gap0, double ratio_cap) {
  require_positive(mu, "mu");
  if (N == 0) throw ParameterError("N must be >= 1");
  const double n = static_cast<double>(N);
  const double first = 1.0 / ((1.0 + delta * delta) * L);
  const double ratio = mu * mu * n * f_gap0 / (L * sigma * sigma);
  const double second = capped_log(ratio, ratio_cap) / (mu * n);
  return std::min({first, second, rgd_max_gamma(L, delta, tau, b)});
}

double pl_floor(const RgdParams& params, double mu, double sigma) {
  const double big_b = static_cast<double>(params.B);
  return 8.0 * params.L / mu * params.gamma *
         (kC1 * params.tau / big_b * std::log2(params.M) +
          (kC1 + 1.0) * params.tau * params.tau / (big_b * big_b)) *
         sigma * sigma;
}

double pl_bound(const RgdParams& params, double mu, double sigma,
                double f_gap0) {
  return std::exp(-mu * params.gamma * static_cast<double>(params.N) / 2.0) *
             f_gap0 +
         pl_floor(params, mu, sigma);
}

double reg_max_gamma(double L, double mu_f, double mu_r, double delta_op,
                     double tau, double b) {
  require_positive(L, "L");
  require_chain(tau, b);
  const double mu = mu_f + mu_r;
  require_positive(mu, "mu_F + mu_r");
  double gamma = std::min(1.0 / (3.0 * mu), 1.0 / (3.0 * L));
  if (delta_op > 0.0) {
    const double d2 = delta_op * delta_op;
    gamma = std::min(gamma, (6.0 * mu_f + mu_r) /
                                (120.0 * markov_variance_factor(tau, b) * d2));
    gamma = std::min(gamma, std::sqrt(b / (18.0 * kC1 * d2 * tau)));
  }
  return gamma;
}

RegParams reg_params_strongly_monotone(double L, double mu_f, double mu_r,
                                       double delta_op, double tau, double b,
                                       double gamma, std::uint64_t N) {
  const double cap = reg_max_gamma(L, mu_f, mu_r, delta_op, tau, b);
  if (gamma <= 0.0) gamma = cap;
  if (gamma > cap * (1.0 + 1e-12)) {
    throw ParameterError("gamma exceeds the strongly monotone bound");
  }
  RegParams r;
  r.mode = RegParams::Mode::kStronglyMonotone;
  r.gamma = gamma;
  r.b = b;
  r.N = N;
  r.M = std::max(2.0, std::sqrt(kC2 / (gamma * (mu_f + mu_r))));
  r.B = batch_for(b, r.M);
  return r;
}

RegParams reg_params_monotone(double L, double tau, std::uint64_t N,
                              double gamma, std::uint64_t B) {
  require_positive(L, "L");
  if (!(tau >= 1.0)) throw ParameterError("tau must be >= 1");
  if (N == 0) throw ParameterError("N must be >= 1");
  const double cap = 1.0 / (3.0 * L);
  if (gamma <= 0.0) gamma = cap;
  if (gamma > cap * (1.0 + 1e-12)) {
    throw ParameterError("gamma must be <= 1/(3L) in monotone mode");
  }
  RegParams r;
  r.mode = RegParams::Mode::kMonotone;
  r.gamma = gamma;
  r.N = N;
  r.M = std::max(2.0, std::sqrt(static_cast<double>(N)));
  r.B = B > 0 ? B : static_cast<std::uint64_t>(std::ceil(tau));
  r.b = static_cast<double>(r.B);
  return r;
}

double reg_rate(double gamma, double mu_f, double mu_r, double divisor) {
  return gamma * (mu_f + mu_r) / divisor;
}

}  // namespace markovopt
