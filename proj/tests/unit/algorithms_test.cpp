#include <cmath>
#include <memory>

#include <gtest/gtest.h>

#include "markovopt/algorithms.hpp"
#include "markovopt/error.hpp"
#include "markovopt/oracles.hpp"
#include "markovopt/problems.hpp"

using namespace markovopt;

namespace {

std::shared_ptr<FiniteMarkovKernel> chain(double eps) {
  return std::make_shared<FiniteMarkovKernel>(two_state_kernel(eps));
}

RunOptions checked(std::vector<Metric> metrics = {}) {
  RunOptions o;
  o.metrics = std::move(metrics);
  o.check_identity = true;
  return o;
}

}  // namespace

TEST(Rasgd, DeterministicLyapunovDecreases) {
  const auto k = chain(0.1);
  const auto p = build_quadratic(1, {2.0}, Vector::Zero(1), 0);
  const auto o = additive_noise_oracle(p, 0.0, *k);
  ChainSampler s(k, 1);
  const auto params = rasgd_params(2, 2, 0, 1, 1, 0.3, 300);
  const auto rec = run_rasgd(*p, *o, s, params, Vector::Constant(1, 5.0),
                             checked({Metric::kLyapunov}));
  const auto& ly = rec.series(Metric::kLyapunov);
  ASSERT_EQ(ly.size(), 301u);
  for (std::size_t i = 1; i < ly.size(); ++i) EXPECT_LT(ly[i], ly[i - 1]);
  EXPECT_LT(ly.back(), 1e-12 * ly.front());
  EXPECT_LE(rec.identity_residual, 1e-10);
}

TEST(Rasgd, VanishingStep) {
  const auto k = chain(0.1);
  const auto p = build_quadratic(2, {1.0, 3.0}, Vector::Zero(2), 2);
  const auto o = masked_gradient_oracle(p, *k);
  ChainSampler s(k, 1);
  const auto params = rasgd_params(3, 1, 1, 7, 7, 1e-9, 1);
  const Vector x0 = Vector::Constant(2, 1.0);
  const auto rec = run_rasgd(*p, *o, s, params, x0);
  EXPECT_LE((rec.final_x - x0).norm(), 1e-6);
}

TEST(Rasgd, ConservationAndDeterminism) {
  const auto k = chain(0.1);
  const auto p = build_quadratic(2, {1.0, 3.0}, Vector::Ones(2), 2);
  const auto params = rasgd_params(3, 1, 1, 7, 7, 0.05, 500);
  RunOptions opt;
  opt.level_seed = 17;
  opt.record_every = 10;

  const auto o1 = masked_gradient_oracle(p, *k);
  ChainSampler s1(k, 3);
  const auto a = run_rasgd(*p, *o1, s1, params, Vector::Zero(2), opt);
  EXPECT_EQ(a.total_oracle_calls, o1->call_count());
  EXPECT_EQ(a.total_chain_advance, s1.steps_taken());
  EXPECT_EQ(a.oracle_calls.back(), a.total_oracle_calls);
  EXPECT_EQ(a.iteration.back(), 500u);

  const auto o2 = masked_gradient_oracle(p, *k);
  ChainSampler s2(k, 3);
  const auto b = run_rasgd(*p, *o2, s2, params, Vector::Zero(2), opt);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.oracle_calls, b.oracle_calls);
  EXPECT_EQ(a.final_x, b.final_x);

  const auto o3 = masked_gradient_oracle(p, *k);
  ChainSampler s3(k, 4);
  EXPECT_NE(run_rasgd(*p, *o3, s3, params, Vector::Zero(2), opt).final_x, a.final_x);
}

TEST(Rasgd, StopRule) {
  const auto k = chain(0.1);
  const auto p = build_quadratic(1, {1.0}, Vector::Zero(1), 0);
  const auto o = additive_noise_oracle(p, 0.0, *k);
  ChainSampler s(k, 1);
  RunOptions opt;
  opt.metrics = {Metric::kDistSq};
  opt.stop = StopRule{Metric::kDistSq, 1e-6};
  const auto rec = run_rasgd(*p, *o, s, rasgd_params(1, 1, 0, 1, 1, 0.5, 10000),
                             Vector::Ones(1), opt);
  EXPECT_TRUE(rec.stopped_early);
  EXPECT_LE(rec.last(Metric::kDistSq), 1e-6);
  EXPECT_LT(rec.iteration.back(), 10000u);
}

TEST(Rasgd, RejectsUnavailableMetric) {
  const auto k = chain(0.1);
  const CosineProblem p(2);
  const auto o = additive_noise_oracle(std::make_shared<CosineProblem>(2), 0.0, *k);
  ChainSampler s(k, 1);
  EXPECT_THROW(run_rasgd(p, *o, s, rasgd_params(2, 1, 0, 1, 1, 0.1, 10), Vector::Zero(2),
                         checked({Metric::kGap})),
               ParameterError);
}

TEST(Restarts, Schedule) {
  RestartConfig c;
  c.L = 2;
  c.mu = 0.01;
  c.budget = 63;
  const auto steps = restart_stepsizes(c, 4096);
  ASSERT_EQ(steps.size(), 4096u);
  EXPECT_DOUBLE_EQ(steps.front(), 3.0 / 8.0);
  for (std::size_t i = 1; i < steps.size(); ++i) EXPECT_LE(steps[i], steps[i - 1]);
  EXPECT_LT(steps.back(), steps.front());
  const auto short_run = restart_stepsizes(c, 4);
  for (double g : short_run) EXPECT_DOUBLE_EQ(g, 3.0 / 8.0);

  const auto k = chain(0.1);
  const auto p = build_quadratic(2, {0.01, 2.0}, Vector::Zero(2), 5);
  const auto o = masked_gradient_oracle(p, *k);
  ChainSampler s(k, 2);
  const auto rec = run_rasgd_restarts(*p, *o, s, c, Vector::Ones(2));
  EXPECT_EQ(rec.restart_starts, (std::vector<std::uint64_t>{0, 1, 3, 7, 15, 31}));
  EXPECT_EQ(rec.gamma.size(), 63u);
  EXPECT_EQ(rec.total_oracle_calls, o->call_count());
}

TEST(Rgd, DeterministicIsGradientDescent) {
  const auto k = chain(0.2);
  const auto p = build_quadratic(2, {1.0, 4.0}, Vector::Ones(2), 8);
  const auto o = additive_noise_oracle(p, 0.0, *k);
  ChainSampler s(k, 1);
  const auto params = rgd_params(4, 0, 1, 1, 0.05, 50);
  const auto rec = run_randomized_gd(*p, *o, s, params, Vector::Zero(2));
  Vector x = Vector::Zero(2);
  for (int i = 0; i < 50; ++i) x -= 0.05 * p->gradient(x);
  EXPECT_LE((rec.final_x - x).norm(), 1e-12);
}

TEST(Rgd, Divergence) {
  const auto k = chain(0.2);
  const auto p = build_quadratic(2, {1.0, 4.0}, Vector::Zero(2), 8);
  const auto o = additive_noise_oracle(p, 0.0, *k);
  ChainSampler s(k, 1);
  RgdParams params;
  params.gamma = 5.0;
  params.N = 10000;
  params.M = 2.0;
  params.B = 1;
  EXPECT_THROW(run_randomized_gd(*p, *o, s, params, Vector::Ones(2)), DivergenceError);
}

TEST(Reg, DeterministicLinearConvergence) {
  Matrix c(1, 1);
  c << 1.0;
  Vector a(1), b(1);
  a << 0.5;
  b << -0.3;
  const auto p = build_bilinear_vi(c, a, b, 1.0);
  const auto k = chain(0.2);
  const auto o = vi_operator_oracle(p, *k, 0.0, 0.0);
  ChainSampler s(k, 1);
  const auto params = reg_params_strongly_monotone(p->lipschitz(), 1, 0, 0, 1, 1, 0, 200);
  const auto rec = run_reg(*p, *o, s, params, Vector::Ones(2), checked({Metric::kDistSq}));
  const auto& d = rec.series(Metric::kDistSq);
  for (std::size_t i = 1; i < d.size(); ++i) EXPECT_LE(d[i], d[i - 1] * (1 + 1e-12));
  EXPECT_LT(d.back(), 1e-10 * d.front());
}

TEST(Reg, FeasibleIterates) {
  Matrix c(1, 1);
  c << 2.0;
  const auto p = build_bilinear_vi(c, Vector::Ones(1), Vector::Zero(1), 0.0,
                                   FeasibleSet::ball(0.5));
  const auto k = chain(0.2);
  const auto o = vi_operator_oracle(p, *k, 1.0, 0.0);
  ChainSampler s(k, 1);
  const auto params = reg_params_monotone(p->lipschitz(), 1, 200);
  const auto rec = run_reg(*p, *o, s, params, Vector::Constant(2, 3.0), checked({Metric::kGap}));
  EXPECT_LE(rec.final_x.norm(), 0.5 + 1e-12);
  for (double g : rec.series(Metric::kGap)) EXPECT_GE(g, -1e-12);
}

TEST(Reg, MonotoneNeedsBoundedSet) {
  Matrix c(1, 1);
  c << 1.0;
  const auto p = build_bilinear_vi(c, Vector::Zero(1), Vector::Zero(1), 0.0);
  const auto k = chain(0.2);
  const auto o = vi_operator_oracle(p, *k, 0.0, 0.0);
  ChainSampler s(k, 1);
  EXPECT_THROW(run_reg(*p, *o, s, reg_params_monotone(1, 1, 10), Vector::Zero(2)),
               ParameterError);
  const auto sm = reg_params_strongly_monotone(1, 1, 0, 0, 1, 1, 0, 10);
  EXPECT_THROW(run_reg(*p, *o, s, sm, Vector::Zero(2)), ParameterError);
}

TEST(Lyapunov, Formula) {
  const auto p = build_quadratic(1, {2.0}, Vector::Constant(1, 1.0), 0);
  EXPECT_NEAR(lyapunov(*p, Vector::Constant(1, 3.0), Vector::Constant(1, 2.0)), 4.0 + 3.0 * 1.0,
              1e-14);
  EXPECT_THROW(lyapunov(CosineProblem(1), Vector::Zero(1), Vector::Zero(1)), ParameterError);
}
