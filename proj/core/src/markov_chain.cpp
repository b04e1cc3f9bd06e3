#include "markovopt/markov_chain.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "markovopt/error.hpp"

namespace markovopt {

namespace {

constexpr double kStationaryResidualTolerance = 1e-10;
constexpr std::uint64_t kDirectJumpThreshold = 256;

}  // namespace

FiniteMarkovKernel::FiniteMarkovKernel(Matrix transitions)
    : transitions_(std::move(transitions)) {
  const auto n = transitions_.rows();
  if (n == 0 || transitions_.cols() != n) {
    throw ParameterError("kernel must be a non-empty square matrix");
  }
  cumulative_.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    double sum = 0.0;
    auto& cum = cumulative_[static_cast<std::size_t>(i)];
    cum.resize(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) {
      const double p = transitions_(i, j);
      if (!(p >= 0.0 && p <= 1.0)) {
        throw ParameterError("kernel entry (" + std::to_string(i) + ", " +
                             std::to_string(j) + ") outside [0, 1]");
      }
      sum += p;
      cum[static_cast<std::size_t>(j)] = sum;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      throw ParameterError("kernel row " + std::to_string(i) +
                           " does not sum to 1");
    }
    cum.back() = 1.0;
  }
}

Matrix FiniteMarkovKernel::power(std::uint64_t t) const {
  const auto n = transitions_.rows();
  Matrix result = Matrix::Identity(n, n);
  Matrix base = transitions_;
  while (t > 0) {
    if (t & 1U) result = result * base;
    t >>= 1U;
    if (t > 0) base = base * base;
  }
  return result;
}

FiniteMarkovKernel two_state_kernel(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 0.5)) {
    throw ParameterError("two_state_kernel: epsilon must lie in (0, 1/2)");
  }
  Matrix m(2, 2);
  m << 1.0 - epsilon, epsilon, epsilon, 1.0 - epsilon;
  return FiniteMarkovKernel(std::move(m));
}

FiniteMarkovKernel perturbed_two_state_kernel(double epsilon, double phi) {
  if (!(epsilon > 0.0 && epsilon < 0.25)) {
    throw ParameterError(
        "perturbed_two_state_kernel: epsilon must lie in (0, 1/4)");
  }
  if (!(phi >= 0.0 && phi <= epsilon)) {
    throw ParameterError("perturbed_two_state_kernel: phi must lie in [0, eps]");
  }
  Matrix m(2, 2);
  m << 1.0 - epsilon, epsilon, epsilon + phi, 1.0 - epsilon - phi;
  return FiniteMarkovKernel(std::move(m));
}

FiniteMarkovKernel regression_kernel(double condition_number, double epsilon) {
  if (!(condition_number > 1.0)) {
    throw ParameterError("regression_kernel: Q must exceed 1");
  }
  if (!(epsilon > 0.0 && epsilon < 0.25)) {
    throw ParameterError("regression_kernel: epsilon must lie in (0, 1/4)");
  }
  const double leave = epsilon / (condition_number - 1.0);
  if (leave > 1.0) {
    throw ParameterError("regression_kernel: eps/(Q-1) exceeds 1");
  }
  Matrix m(2, 2);
  m << 1.0 - leave, leave, epsilon, 1.0 - epsilon;
  return FiniteMarkovKernel(std::move(m));
}

FiniteMarkovKernel kronecker_kernel(const FiniteMarkovKernel& first,
                                    const FiniteMarkovKernel& second) {
  const Matrix& a = first.matrix();
  const Matrix& b = second.matrix();
  const auto n1 = a.rows();
  const auto n2 = b.rows();
  Matrix out(n1 * n2, n1 * n2);
  for (Eigen::Index i = 0; i < n1; ++i) {
    for (Eigen::Index k = 0; k < n1; ++k) {
      out.block(i * n2, k * n2, n2, n2) = a(i, k) * b;
    }
  }
  return FiniteMarkovKernel(std::move(out));
}

Vector stationary_distribution(const FiniteMarkovKernel& kernel) {
  const Matrix& q = kernel.matrix();
  const auto n = q.rows();
  if (n == 1) return Vector::Ones(1);

  const Matrix generator = q.transpose() - Matrix::Identity(n, n);
  Eigen::FullPivLU<Matrix> lu(generator);
  lu.setThreshold(1e-10);
  if (lu.rank() != n - 1) {
    throw ErgodicityError("stationary distribution is not unique (rank " +
                          std::to_string(lu.rank()) + ", expected " +
                          std::to_string(n - 1) + ")");
  }

  // Replace one balance equation by the normalisation sum(pi) = 1.
  Matrix system = generator;
  system.row(n - 1).setOnes();
  Vector rhs = Vector::Zero(n);
  rhs(n - 1) = 1.0;
  Vector pi = system.fullPivLu().solve(rhs);

  for (Eigen::Index i = 0; i < n; ++i) {
    if (pi(i) < 0.0) {
      if (pi(i) < -kStationaryResidualTolerance) {
        throw ErgodicityError("stationary solve produced a negative mass");
      }
      pi(i) = 0.0;
    }
  }
  pi /= pi.sum();

  const double residual =
      (q.transpose() * pi - pi).lpNorm<Eigen::Infinity>();
  if (residual > kStationaryResidualTolerance) {
    throw ErgodicityError("stationary solve residual " +
                          std::to_string(residual) + " too large");
  }
  return pi;
}

double dobrushin_coefficient(const Matrix& transitions) {
  const auto n = transitions.rows();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double tv =
          0.5 * (transitions.row(i) - transitions.row(j)).lpNorm<1>();
      worst = std::max(worst, tv);
    }
  }
  return std::min(worst, 1.0);
}

double dobrushin_coefficient(const FiniteMarkovKernel& kernel,
                             std::uint64_t power) {
  if (power == 0) {
    throw ParameterError("dobrushin_coefficient: power must be >= 1");
  }
  return dobrushin_coefficient(kernel.power(power));
}

MixingProfile mixing_time(const FiniteMarkovKernel& kernel, int max_power) {
  if (max_power < 1) {
    throw ParameterError("mixing_time: max_power must be >= 1");
  }
  MixingProfile profile;
  const auto n = kernel.matrix().rows();
  profile.dobrushin_by_power.push_back(n > 1 ? 1.0 : 0.0);
  Matrix current = kernel.matrix();
  for (int t = 1; t <= max_power; ++t) {
    const double delta = dobrushin_coefficient(current);
    profile.dobrushin_by_power.push_back(delta);
    if (delta <= 0.25) {
      profile.tau = t;
      return profile;
    }
    current = current * kernel.matrix();
  }
  throw NotMixedError(max_power);
}

int two_state_mixing_bound(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 0.5)) {
    throw ParameterError("two_state_mixing_bound: epsilon must lie in (0, 1/2)");
  }
  return static_cast<int>(std::ceil(std::log(4.0) / epsilon));
}

ChainSampler::ChainSampler(std::shared_ptr<const FiniteMarkovKernel> kernel,
                           std::uint64_t seed)
    : kernel_(std::move(kernel)), rng_(seed) {
  if (!kernel_) throw ParameterError("ChainSampler: null kernel");
  const Vector pi = stationary_distribution(*kernel_);
  std::vector<double> cumulative(static_cast<std::size_t>(pi.size()));
  double sum = 0.0;
  for (Eigen::Index i = 0; i < pi.size(); ++i) {
    sum += pi(i);
    cumulative[static_cast<std::size_t>(i)] = sum;
  }
  cumulative.back() = 1.0;
  current_ = draw_from(cumulative.data(), cumulative.size());
}

ChainSampler::ChainSampler(std::shared_ptr<const FiniteMarkovKernel> kernel,
                           std::uint64_t seed, StateIndex initial_state)
    : kernel_(std::move(kernel)), rng_(seed), current_(initial_state) {
  if (!kernel_) throw ParameterError("ChainSampler: null kernel");
  if (initial_state >= kernel_->state_count()) {
    throw ParameterError("ChainSampler: initial state out of range");
  }
}

StateIndex ChainSampler::draw_from(const double* cumulative,
                                   std::size_t count) {
  const double u = rng_.uniform();
  for (std::size_t i = 0; i < count; ++i) {
    if (u < cumulative[i]) return i;
  }
  // u < 1 == cumulative[count-1]; unreachable.
  return count - 1;
}

StateIndex ChainSampler::sample_next() {
  const auto& cum = kernel_->cumulative_row(current_);
  current_ = draw_from(cum.data(), cum.size());
  ++steps_;
  return current_;
}

void ChainSampler::advance(std::uint64_t steps) {
  if (steps <= kDirectJumpThreshold) {
    for (std::uint64_t i = 0; i < steps; ++i) sample_next();
    return;
  }
  const Matrix jump = kernel_->power(steps);
  const auto row = static_cast<Eigen::Index>(current_);
  std::vector<double> cumulative(kernel_->state_count());
  double sum = 0.0;
  for (std::size_t j = 0; j < cumulative.size(); ++j) {
    sum += jump(row, static_cast<Eigen::Index>(j));
    cumulative[j] = sum;
  }
  cumulative.back() = 1.0;
  current_ = draw_from(cumulative.data(), cumulative.size());
  steps_ += steps;
}

void to_json(nlohmann::json& j, const FiniteMarkovKernel& kernel) {
  const Matrix& m = kernel.matrix();
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  j = nlohmann::json{{"states", m.rows()}, {"rows", std::move(rows)}};
}

FiniteMarkovKernel kernel_from_json(const nlohmann::json& j) {
  if (!j.contains("states") || !j.contains("rows")) {
    throw ParameterError("kernel JSON needs \"states\" and \"rows\"");
  }
  const auto states = j.at("states").get<Eigen::Index>();
  const auto& rows = j.at("rows");
  if (states <= 0 || !rows.is_array() ||
      static_cast<Eigen::Index>(rows.size()) != states) {
    throw ParameterError("kernel JSON: row count does not match states");
  }
  Matrix m(states, states);
  for (Eigen::Index i = 0; i < states; ++i) {
    const auto& row = rows.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != states) {
      throw ParameterError("kernel JSON: row " + std::to_string(i) +
                           " has wrong length");
    }
    for (Eigen::Index k = 0; k < states; ++k) {
      m(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
    }
  }
  return FiniteMarkovKernel(std::move(m));
}

}  // namespace markovopt
