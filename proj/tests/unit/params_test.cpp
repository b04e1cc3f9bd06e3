#include <cmath>

#include <gtest/gtest.h>

#include "markovopt/error.hpp"
#include "markovopt/params.hpp"

using namespace markovopt;

TEST(Constants, Values) {
  const double l4 = std::log(4.0);
  EXPECT_DOUBLE_EQ(kC1, 16.0 * (1.0 + 1.0 / (l4 * l4)));
  EXPECT_DOUBLE_EQ(kC2, 256.0 / 3.0);
  EXPECT_DOUBLE_EQ(markov_variance_factor(2.0, 4.0), kC1 * 0.5 + (kC1 + 1) * 0.25);
}

TEST(Rasgd, PAtLargestStep) {
  EXPECT_NEAR(rasgd_p(2.0, 0.0, 1.0, 1.0, 3.0 / 8.0), 2.0 / 9.0, 1e-15);
  const double with_noise = rasgd_p(1.0, 0.5, 3.0, 3.0, 0.1);
  const double inner = 1 + 4 * (kC1 + kC1 + 1) * 0.25;
  EXPECT_NEAR(with_noise, 1.0 / (1.0 + 2.0 * 1.1 * inner), 1e-15);
}

TEST(Rasgd, DerivedConstants) {
  const double L = 10, mu = 0.5, gamma = 0.05;
  const auto r = rasgd_params(L, mu, 0.3, 4, 4, gamma, 1000);
  EXPECT_NEAR(r.beta * r.beta, 4 * r.p * r.p * mu * gamma / 3, 1e-15);
  EXPECT_NEAR(r.eta, std::sqrt(3 / (mu * gamma)), 1e-12);
  EXPECT_NEAR(r.beta / 2, r.p / r.eta, 1e-15);
  EXPECT_NEAR(r.theta, (r.p / r.eta - 1) / (r.beta * r.p / r.eta - 1), 1e-15);
  EXPECT_NEAR(r.M, std::max(2.0, std::sqrt(kC2 / r.p * (1 + 2 * r.p / r.beta))), 1e-9);
  EXPECT_EQ(r.B, static_cast<std::uint64_t>(std::ceil(4 * std::log2(r.M))));
  EXPECT_GE(r.M, 2.0);
  EXPECT_LE(r.beta, 1.0);
  EXPECT_DOUBLE_EQ(r.contraction(), 1 - r.beta / 2);
}

TEST(Rasgd, Errors) {
  EXPECT_THROW(rasgd_params(1, 1, 0, 1, 1, 0.8, 10), ParameterError);
  EXPECT_THROW(rasgd_params(1, 1, 0, 1, 1, 0.0, 10), ParameterError);
  EXPECT_THROW(rasgd_params(1, 0, 0, 1, 1, 0.5, 10), ParameterError);
  EXPECT_THROW(rasgd_params(1, 1, 0, 0.5, 1, 0.5, 10), ParameterError);
  EXPECT_THROW(rasgd_params(1, 1, -1, 1, 1, 0.5, 10), ParameterError);
  EXPECT_NO_THROW(rasgd_params(1, 1, 0, 1, 1, 0.75, 10));
}

TEST(Rasgd, HorizonStepsize) {
  const double L = 4, mu = 1, p = 0.2;
  EXPECT_DOUBLE_EQ(rasgd_gamma_for_horizon(L, mu, p, 10, 1.0, 1.0), rasgd_max_gamma(L));
  const std::uint64_t N = 100000;
  EXPECT_NEAR(rasgd_gamma_for_horizon(L, mu, p, N, 0.0, 1.0),
              std::log(1e12) / (p * p * mu * double(N) * N), 1e-20);
  EXPECT_NEAR(rasgd_gamma_for_horizon(L, mu, p, N, 1e6, 1.0),
              std::log(2.0) / (p * p * mu * double(N) * N), 1e-20);
  EXPECT_THROW(rasgd_gamma_for_horizon(L, mu, p, 0, 1.0, 1.0), ParameterError);
}

TEST(Rasgd, BoundAndFloor) {
  const auto r = rasgd_params(2, 1, 0, 1, 1, 0.1, 500);
  EXPECT_DOUBLE_EQ(rasgd_floor(r, 0.0), 0.0);
  EXPECT_NEAR(rasgd_bound(r, 0.0, 3.0), std::exp(-500 * std::sqrt(r.p * r.p * 0.1 / 3)) * 3.0,
              1e-15);
  const double f = 144 * r.p * std::sqrt(0.1) / std::sqrt(3.0) * (kC1 + kC1 + 1) * 4.0;
  EXPECT_NEAR(rasgd_floor(r, 2.0), f, 1e-9 * f);
}

TEST(Rgd, Params) {
  const double g = rgd_max_gamma(2, 0.5, 3, 3);
  EXPECT_NEAR(g, 1 / (8 * (1 + 4 * markov_variance_factor(3, 3) * 0.25)), 1e-15);
  const auto r = rgd_params(2, 0.5, 3, 3, g, 100);
  EXPECT_NEAR(r.M, std::max(2.0, std::sqrt(kC2 / (g * 2))), 1e-12);
  EXPECT_EQ(r.B, static_cast<std::uint64_t>(std::ceil(3 * std::log2(r.M))));
  EXPECT_THROW(rgd_params(2, 0.5, 3, 3, 2 * g, 100), ParameterError);
  EXPECT_NEAR(rgd_bound(r, 0.0, 5.0), 20 / (g * 100), 1e-12);
}

TEST(Rgd, PlStepsize) {
  const double L = 2, mu = 0.5;
  const std::uint64_t N = 100000;
  const double g = pl_gamma(L, mu, 0.0, 1, 1, N, 1.0, 1.0);
  EXPECT_NEAR(g, std::log(mu * mu * N / L) / (mu * N), 1e-15);
  EXPECT_DOUBLE_EQ(pl_gamma(L, mu, 0.0, 1, 1, 10, 1.0, 1.0), rgd_max_gamma(L, 0, 1, 1));
  const auto r = rgd_params(L, 0, 1, 1, g, N);
  EXPECT_NEAR(pl_bound(r, mu, 0.0, 2.0), std::exp(-mu * g * N / 2) * 2.0, 1e-15);
  EXPECT_GT(pl_floor(r, mu, 1.0), 0.0);
}

TEST(Reg, StronglyMonotone) {
  EXPECT_DOUBLE_EQ(reg_max_gamma(3, 1, 0, 0, 1, 1), 1.0 / 9.0);
  const double delta = 0.5, tau = 2, b = 2;
  const double g = reg_max_gamma(1, 0.2, 0.1, delta, tau, b);
  const double expected =
      std::min({1 / 0.9, 1 / 3.0,
                (6 * 0.2 + 0.1) / (120 * markov_variance_factor(tau, b) * delta * delta),
                std::sqrt(b / (18 * kC1 * delta * delta * tau))});
  EXPECT_NEAR(g, expected, 1e-15);
  const auto r = reg_params_strongly_monotone(1, 0.2, 0.1, delta, tau, b, 0.0, 100);
  EXPECT_DOUBLE_EQ(r.gamma, g);
  EXPECT_NEAR(r.M, std::max(2.0, std::sqrt(kC2 / (g * 0.3))), 1e-12);
  EXPECT_THROW(reg_params_strongly_monotone(1, 0.2, 0.1, delta, tau, b, 2 * g, 100),
               ParameterError);
  EXPECT_DOUBLE_EQ(reg_rate(0.1, 1, 0.5, 2), 0.075);
}

TEST(Reg, Monotone) {
  const auto r = reg_params_monotone(2, 3, 400);
  EXPECT_DOUBLE_EQ(r.gamma, 1.0 / 6.0);
  EXPECT_DOUBLE_EQ(r.M, 20.0);
  EXPECT_EQ(r.B, 3u);
  EXPECT_EQ(reg_params_monotone(2, 3, 1).M, 2.0);
  EXPECT_EQ(reg_params_monotone(2, 3, 400, 0.1, 7).B, 7u);
  EXPECT_THROW(reg_params_monotone(2, 3, 400, 0.2), ParameterError);
}
