#include "markovopt/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <nlohmann/json.hpp>

#include "markovopt/error.hpp"
#include "markovopt/rng.hpp"

namespace markovopt {

NoisyOracle::NoisyOracle(std::size_t dimension, const FiniteMarkovKernel& kernel,
                         GrowthParams growth)
    : dimension_(dimension),
      state_count_(kernel.state_count()),
      stationary_(stationary_distribution(kernel)),
      growth_(growth) {
  if (dimension == 0) throw ParameterError("oracle dimension must be >= 1");
}

void NoisyOracle::check_state(StateIndex z) const {
  if (z >= state_count_) throw ParameterError("oracle: state out of range");
}

void NoisyOracle::evaluate_into(const Vector& x, StateIndex z, Vector& out) const {
  if (static_cast<std::size_t>(x.size()) != dimension_) {
    throw ParameterError("oracle: dimension mismatch");
  }
  check_state(z);
  calls_.fetch_add(1, std::memory_order_relaxed);
  evaluate_raw(x, z, out);
}

Vector NoisyOracle::evaluate(const Vector& x, StateIndex z) const {
  Vector out(static_cast<Eigen::Index>(dimension_));
  evaluate_into(x, z, out);
  return out;
}

void NoisyOracle::accumulate(const Vector& x, const StateIndex* states,
                             std::size_t count, Vector& sum) const {
  if (static_cast<std::size_t>(x.size()) != dimension_ ||
      static_cast<std::size_t>(sum.size()) != dimension_) {
    throw ParameterError("oracle: dimension mismatch");
  }
  if (count == 0) return;
  calls_.fetch_add(count, std::memory_order_relaxed);
  accumulate_raw(x, states, count, sum);
}

void NoisyOracle::accumulate_raw(const Vector& x, const StateIndex* states,
                                 std::size_t count, Vector& sum) const {
  Vector value(static_cast<Eigen::Index>(dimension_));
  for (std::size_t i = 0; i < count; ++i) {
    evaluate_raw(x, states[i], value);
    sum += value;
  }
}

Vector NoisyOracle::mean_field(const Vector& x) const {
  Vector out(static_cast<Eigen::Index>(dimension_));
  mean_into(x, out);
  return out;
}

double NoisyOracle::growth_bound(const Vector& x) const {
  return growth_.sigma * growth_.sigma +
         growth_.delta * growth_.delta * growth_reference(x);
}

std::vector<int> alternating_signs(std::size_t states) {
  std::vector<int> signs(states);
  for (std::size_t i = 0; i < states; ++i) signs[i] = (i % 2 == 0) ? 1 : -1;
  return signs;
}

std::vector<int> lift_to_kronecker(const std::vector<int>& labels,
                                   std::size_t first_states,
                                   std::size_t second_states, bool first_factor) {
  if (labels.size() != (first_factor ? first_states : second_states)) {
    throw ParameterError("lift_to_kronecker: label count does not match factor");
  }
  std::vector<int> out(first_states * second_states);
  for (std::size_t i = 0; i < first_states; ++i) {
    for (std::size_t j = 0; j < second_states; ++j) {
      out[i * second_states + j] = first_factor ? labels[i] : labels[j];
    }
  }
  return out;
}

namespace {

void check_signs(const std::vector<int>& signs, std::size_t states,
                 const char* who) {
  if (signs.size() != states) {
    throw ParameterError(std::string(who) + ": one sign per chain state needed");
  }
  for (int s : signs) {
    if (s != 1 && s != -1) {
      throw ParameterError(std::string(who) + ": signs must be +1 or -1");
    }
  }
}

nlohmann::json labels_json(const std::vector<int>& labels) { return labels; }

}  // namespace

// ---------------------------------------------------------------------------
// Masked

MaskedOracle::MaskedOracle(std::shared_ptr<const SmoothProblem> problem,
                           const FiniteMarkovKernel& kernel,
                           std::vector<int> parity)
    : NoisyOracle(problem ? problem->dimension() : 1, kernel, {0.0, 1.0, false}),
      problem_(std::move(problem)),
      parity_(std::move(parity)) {
  if (!problem_) throw ParameterError("masked oracle: null problem");
  if (problem_->dimension() % 2 != 0) {
    throw ParameterError("masked oracle: dimension must be even");
  }
  check_signs(parity_, state_count(), "masked oracle");
  double plus = 0.0;
  for (std::size_t z = 0; z < parity_.size(); ++z) {
    if (parity_[z] == 1) plus += stationary()(static_cast<Eigen::Index>(z));
  }
  mask_weight_.resize(static_cast<Eigen::Index>(dimension()));
  for (Eigen::Index i = 0; i < mask_weight_.size(); ++i) {
    mask_weight_(i) = 2.0 * (i % 2 == 0 ? plus : 1.0 - plus);
  }
}

void MaskedOracle::evaluate_raw(const Vector& x, StateIndex z, Vector& out) const {
  problem_->gradient_into(x, out);
  const Eigen::Index keep = parity_[z] == 1 ? 0 : 1;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out(i) = (i % 2 == keep) ? 2.0 * out(i) : 0.0;
  }
}

void MaskedOracle::accumulate_raw(const Vector& x, const StateIndex* states,
                                  std::size_t count, Vector& sum) const {
  std::size_t plus = 0;
  for (std::size_t i = 0; i < count; ++i) {
    check_state(states[i]);
    if (parity_[states[i]] == 1) ++plus;
  }
  const double even = 2.0 * static_cast<double>(plus);
  const double odd = 2.0 * static_cast<double>(count - plus);
  Vector grad(x.size());
  problem_->gradient_into(x, grad);
  for (Eigen::Index i = 0; i < grad.size(); ++i) {
    sum(i) += (i % 2 == 0 ? even : odd) * grad(i);
  }
}

void MaskedOracle::mean_into(const Vector& x, Vector& out) const {
  problem_->gradient_into(x, out);
  out.array() *= mask_weight_.array();
}

double MaskedOracle::growth_reference(const Vector& x) const {
  return problem_->gradient(x).squaredNorm();
}

Vector MaskedOracle::probe_center() const {
  return problem_->minimizer().value_or(
      Vector::Zero(static_cast<Eigen::Index>(dimension())));
}

nlohmann::json MaskedOracle::to_json() const {
  return {{"kind", "masked"}, {"parity", labels_json(parity_)}};
}

std::shared_ptr<MaskedOracle> masked_gradient_oracle(
    std::shared_ptr<const SmoothProblem> problem,
    const FiniteMarkovKernel& kernel, std::vector<int> parity) {
  if (parity.empty()) parity = alternating_signs(kernel.state_count());
  return std::make_shared<MaskedOracle>(std::move(problem), kernel,
                                        std::move(parity));
}

// ---------------------------------------------------------------------------
// Additive

AdditiveNoiseOracle::AdditiveNoiseOracle(
    std::shared_ptr<const SmoothProblem> problem,
    const FiniteMarkovKernel& kernel, double sigma, std::vector<int> sign,
    Vector direction)
    : NoisyOracle(problem ? problem->dimension() : 1, kernel, {}),
      problem_(std::move(problem)),
      sigma_(sigma),
      sign_(std::move(sign)),
      direction_(std::move(direction)) {
  if (!problem_) throw ParameterError("additive oracle: null problem");
  if (!(sigma >= 0.0)) throw ParameterError("additive oracle: sigma must be >= 0");
  check_signs(sign_, state_count(), "additive oracle");
  if (static_cast<std::size_t>(direction_.size()) != dimension() ||
      std::abs(direction_.norm() - 1.0) > 1e-12) {
    throw ParameterError("additive oracle: direction must be a unit vector");
  }
  mean_sign_ = 0.0;
  for (std::size_t z = 0; z < sign_.size(); ++z) {
    mean_sign_ += stationary()(static_cast<Eigen::Index>(z)) * sign_[z];
  }
  double worst = 0.0;
  for (int s : sign_) worst = std::max(worst, std::abs(s - mean_sign_));
  set_growth({0.5 * sigma_ * worst, 0.0, false});
}

void AdditiveNoiseOracle::evaluate_raw(const Vector& x, StateIndex z,
                                       Vector& out) const {
  problem_->gradient_into(x, out);
  out += (0.5 * sigma_ * sign_[z]) * direction_;
}

void AdditiveNoiseOracle::accumulate_raw(const Vector& x,
                                         const StateIndex* states,
                                         std::size_t count, Vector& sum) const {
  long long signed_count = 0;
  for (std::size_t i = 0; i < count; ++i) {
    check_state(states[i]);
    signed_count += sign_[states[i]];
  }
  Vector grad(x.size());
  problem_->gradient_into(x, grad);
  sum += static_cast<double>(count) * grad;
  sum += (0.5 * sigma_ * static_cast<double>(signed_count)) * direction_;
}

void AdditiveNoiseOracle::mean_into(const Vector& x, Vector& out) const {
  problem_->gradient_into(x, out);
  out += (0.5 * sigma_ * mean_sign_) * direction_;
}

double AdditiveNoiseOracle::growth_reference(const Vector& x) const {
  return problem_->gradient(x).squaredNorm();
}

Vector AdditiveNoiseOracle::probe_center() const {
  return problem_->minimizer().value_or(
      Vector::Zero(static_cast<Eigen::Index>(dimension())));
}

nlohmann::json AdditiveNoiseOracle::to_json() const {
  return {{"kind", "additive"},
          {"sigma", sigma_},
          {"sign", labels_json(sign_)},
          {"direction", vector_to_json(direction_)}};
}

std::shared_ptr<AdditiveNoiseOracle> additive_noise_oracle(
    double mu, double x_star, double sigma, const FiniteMarkovKernel& kernel,
    std::vector<int> sign) {
  if (!(mu > 0.0)) throw ParameterError("additive oracle: mu must be > 0");
  auto problem = build_quadratic(1, {mu}, Vector::Constant(1, x_star), 0);
  return additive_noise_oracle(std::move(problem), sigma, kernel,
                               std::move(sign), Vector::Ones(1));
}

std::shared_ptr<AdditiveNoiseOracle> additive_noise_oracle(
    std::shared_ptr<const SmoothProblem> problem, double sigma,
    const FiniteMarkovKernel& kernel, std::vector<int> sign, Vector direction) {
  if (!problem) throw ParameterError("additive oracle: null problem");
  if (sign.empty()) sign = alternating_signs(kernel.state_count());
  if (direction.size() == 0) {
    direction = Vector::Unit(static_cast<Eigen::Index>(problem->dimension()), 0);
  }
  return std::make_shared<AdditiveNoiseOracle>(std::move(problem), kernel, sigma,
                                               std::move(sign),
                                               std::move(direction));
}

// ---------------------------------------------------------------------------
// Least squares

namespace {

Vector feature_masses(const Vector& pi, const std::vector<int>& feature,
                      Eigen::Index dimension) {
  Vector mass = Vector::Zero(dimension);
  for (std::size_t z = 0; z < feature.size(); ++z) {
    mass(feature[z]) += pi(static_cast<Eigen::Index>(z));
  }
  return mass;
}

GrowthParams least_squares_growth(const Vector& mass) {
  double delta = 1.0;
  for (Eigen::Index k = 0; k < mass.size(); ++k) {
    delta = std::max(delta, std::abs(1.0 / mass(k) - 1.0));
  }
  return {0.0, delta, false};
}

}  // namespace

LeastSquaresOracle::LeastSquaresOracle(const Vector& minimizer,
                                       const FiniteMarkovKernel& kernel,
                                       std::vector<int> feature)
    : NoisyOracle(static_cast<std::size_t>(std::max<Eigen::Index>(minimizer.size(), 1)),
                  kernel, {}),
      minimizer_(minimizer),
      feature_(std::move(feature)) {
  if (feature_.size() != state_count()) {
    throw ParameterError("least squares oracle: one feature per state needed");
  }
  for (int k : feature_) {
    if (k < 0 || k >= minimizer_.size()) {
      throw ParameterError("least squares oracle: feature index out of range");
    }
  }
  const Vector mass = feature_masses(stationary(), feature_, minimizer_.size());
  if ((mass.array() <= 0.0).any()) {
    throw ParameterError(
        "least squares oracle: every feature needs positive stationary mass");
  }
  problem_ = build_least_squares_problem(minimizer_, mass);
  set_growth(least_squares_growth(mass));
}

void LeastSquaresOracle::evaluate_raw(const Vector& x, StateIndex z,
                                      Vector& out) const {
  out.setZero(x.size());
  const auto k = static_cast<Eigen::Index>(feature_[z]);
  out(k) = x(k) - minimizer_(k);
}

void LeastSquaresOracle::mean_into(const Vector& x, Vector& out) const {
  problem_->gradient_into(x, out);
}

double LeastSquaresOracle::growth_reference(const Vector& x) const {
  return problem_->gradient(x).squaredNorm();
}

Vector LeastSquaresOracle::probe_center() const { return minimizer_; }

nlohmann::json LeastSquaresOracle::to_json() const {
  return {{"kind", "least_squares"}, {"feature", labels_json(feature_)}};
}

std::shared_ptr<LeastSquaresOracle> markov_least_squares_oracle(
    const Vector& minimizer, const FiniteMarkovKernel& kernel,
    std::vector<int> feature) {
  if (feature.empty()) {
    feature.resize(kernel.state_count());
    for (std::size_t z = 0; z < feature.size(); ++z) {
      feature[z] = static_cast<int>(z % static_cast<std::size_t>(minimizer.size()));
    }
  }
  return std::make_shared<LeastSquaresOracle>(minimizer, kernel,
                                              std::move(feature));
}

// ---------------------------------------------------------------------------
// VI operator

VIOperatorOracle::VIOperatorOracle(std::shared_ptr<const VIProblem> problem,
                                   const FiniteMarkovKernel& kernel, double sigma,
                                   double delta_op, std::vector<int> sign,
                                   std::vector<Vector> direction)
    : NoisyOracle(problem ? problem->dimension() : 1, kernel, {}),
      problem_(std::move(problem)),
      sigma_(sigma),
      delta_op_(delta_op),
      sign_(std::move(sign)),
      direction_(std::move(direction)) {
  if (!problem_) throw ParameterError("VI oracle: null problem");
  if (!(sigma >= 0.0) || !(delta_op >= 0.0)) {
    throw ParameterError("VI oracle: sigma and Delta must be >= 0");
  }
  check_signs(sign_, state_count(), "VI oracle");
  if (direction_.size() != state_count()) {
    throw ParameterError("VI oracle: one direction per state needed");
  }
  Vector drift = Vector::Zero(static_cast<Eigen::Index>(dimension()));
  for (std::size_t z = 0; z < direction_.size(); ++z) {
    const Vector& u = direction_[z];
    if (static_cast<std::size_t>(u.size()) != dimension() ||
        std::abs(u.norm() - 1.0) > 1e-12) {
      throw ParameterError("VI oracle: directions must be unit vectors");
    }
    drift += stationary()(static_cast<Eigen::Index>(z)) * sign_[z] * u;
  }
  if (drift.norm() > 1e-12) {
    throw UnbiasednessError(
        "VI oracle: perturbation has nonzero stationary mean");
  }
  if (delta_op > 0.0 && !problem_->solution()) {
    throw ParameterError("VI oracle: Delta > 0 needs a known solution x*");
  }
  center_ = problem_->solution().value_or(
      Vector::Zero(static_cast<Eigen::Index>(dimension())));
  set_growth({std::sqrt(2.0) * sigma_, std::sqrt(2.0) * delta_op_, true});
}

void VIOperatorOracle::evaluate_raw(const Vector& x, StateIndex z,
                                    Vector& out) const {
  problem_->field_into(x, out);
  double scale = sigma_;
  if (delta_op_ > 0.0) scale += delta_op_ * (x - center_).norm();
  if (scale != 0.0) out += (sign_[z] * scale) * direction_[z];
}

void VIOperatorOracle::mean_into(const Vector& x, Vector& out) const {
  problem_->field_into(x, out);
}

double VIOperatorOracle::growth_reference(const Vector& x) const {
  return (x - center_).squaredNorm();
}

Vector VIOperatorOracle::probe_center() const { return center_; }

nlohmann::json VIOperatorOracle::to_json() const {
  nlohmann::json directions = nlohmann::json::array();
  for (const auto& u : direction_) directions.push_back(vector_to_json(u));
  return {{"kind", "vi_operator"},
          {"sigma", sigma_},
          {"delta", delta_op_},
          {"sign", labels_json(sign_)},
          {"direction", std::move(directions)}};
}

std::shared_ptr<VIOperatorOracle> vi_operator_oracle(
    std::shared_ptr<const VIProblem> problem, const FiniteMarkovKernel& kernel,
    double sigma, double delta_op, std::vector<int> sign,
    std::vector<Vector> direction) {
  if (!problem) throw ParameterError("VI oracle: null problem");
  if (sign.empty()) sign = alternating_signs(kernel.state_count());
  if (direction.empty()) {
    direction.assign(kernel.state_count(),
                     Vector::Unit(static_cast<Eigen::Index>(problem->dimension()), 0));
  }
  return std::make_shared<VIOperatorOracle>(std::move(problem), kernel, sigma,
                                            delta_op, std::move(sign),
                                            std::move(direction));
}

// ---------------------------------------------------------------------------
// Verification

GrowthReport verify_growth(const NoisyOracle& oracle,
                           const std::vector<Vector>& probes) {
  GrowthReport report;
  report.max_violation = -std::numeric_limits<double>::infinity();
  report.proven = oracle.growth_proven();
  Vector value(static_cast<Eigen::Index>(oracle.dimension()));
  for (const Vector& x : probes) {
    const Vector mean = oracle.mean_field(x);
    const double bound = oracle.growth_bound(x);
    for (StateIndex z = 0; z < oracle.state_count(); ++z) {
      oracle.evaluate_into(x, z, value);
      report.max_violation =
          std::max(report.max_violation, (value - mean).squaredNorm() - bound);
    }
    ++report.probes;
  }
  return report;
}

Vector stationary_mean(const NoisyOracle& oracle, const Vector& x) {
  Vector sum = Vector::Zero(static_cast<Eigen::Index>(oracle.dimension()));
  Vector value(sum.size());
  for (StateIndex z = 0; z < oracle.state_count(); ++z) {
    oracle.evaluate_into(x, z, value);
    sum += oracle.stationary()(static_cast<Eigen::Index>(z)) * value;
  }
  return sum;
}

std::vector<Vector> default_probe_points(const Vector& center,
                                         std::size_t count, std::uint64_t seed,
                                         double radius) {
  Rng rng(seed);
  const auto d = center.size();
  std::vector<Vector> probes;
  probes.reserve(count + 2);
  for (std::size_t i = 0; i < count; ++i) {
    Vector u(d);
    for (Eigen::Index k = 0; k < d; ++k) u(k) = rng.normal();
    const double r = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
    probes.push_back(center + (r / u.norm()) * u);
  }
  probes.push_back(Vector::Zero(d));
  probes.push_back(center);
  return probes;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

std::vector<int> labels_or_default(const nlohmann::json& j, const char* key,
                                   std::size_t states) {
  if (j.contains(key)) return j.at(key).get<std::vector<int>>();
  return alternating_signs(states);
}

}  // namespace

std::shared_ptr<NoisyOracle> smooth_oracle_from_json(
    const nlohmann::json& j, std::shared_ptr<const SmoothProblem> problem,
    const FiniteMarkovKernel& kernel) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "masked") {
    return masked_gradient_oracle(std::move(problem), kernel,
                                  labels_or_default(j, "parity", kernel.state_count()));
  }
  if (kind == "additive") {
    Vector direction;
    if (j.contains("direction")) direction = vector_from_json(j.at("direction"));
    return additive_noise_oracle(std::move(problem), j.at("sigma").get<double>(),
                                 kernel,
                                 labels_or_default(j, "sign", kernel.state_count()),
                                 std::move(direction));
  }
  if (kind == "least_squares") {
    if (!problem->minimizer()) {
      throw ParameterError("least squares oracle needs a problem with known x*");
    }
    std::vector<int> feature;
    if (j.contains("feature")) feature = j.at("feature").get<std::vector<int>>();
    return markov_least_squares_oracle(*problem->minimizer(), kernel,
                                       std::move(feature));
  }
  throw ParameterError("unknown oracle kind \"" + kind + "\"");
}

std::shared_ptr<NoisyOracle> vi_oracle_from_json(
    const nlohmann::json& j, std::shared_ptr<const VIProblem> problem,
    const FiniteMarkovKernel& kernel) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind != "vi_operator") {
    throw ParameterError("unknown VI oracle kind \"" + kind + "\"");
  }
  std::vector<Vector> direction;
  if (j.contains("direction")) {
    for (const auto& u : j.at("direction")) direction.push_back(vector_from_json(u));
  }
  return vi_operator_oracle(std::move(problem), kernel, j.value("sigma", 0.0),
                            j.value("delta", 0.0),
                            labels_or_default(j, "sign", kernel.state_count()),
                            std::move(direction));
}

}  // namespace markovopt
