#include "markovopt/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "markovopt/error.hpp"
#include "markovopt/rng.hpp"

namespace markovopt {

Vector vector_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ParameterError("expected a JSON array for a vector");
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(),
                                  static_cast<Eigen::Index>(values.size()));
}

nlohmann::json vector_to_json(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Matrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) {
    throw ParameterError("expected a non-empty row-major JSON matrix");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw ParameterError("ragged JSON matrix");
    }
    for (Eigen::Index k = 0; k < cols; ++k) {
      m(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
    }
  }
  return m;
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Quadratic

namespace {

Vector checked_spectrum(const Matrix& h, const Vector& center) {
  if (h.rows() != h.cols() || h.rows() != center.size() || center.size() == 0) {
    throw ParameterError("QuadraticProblem: dimension mismatch");
  }
  if (!h.isApprox(h.transpose(), 1e-12)) {
    throw ParameterError("QuadraticProblem: Hessian must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
  Vector spectrum = solver.eigenvalues();
  if (spectrum.minCoeff() < -1e-12 * std::max(1.0, spectrum.maxCoeff())) {
    throw ParameterError("QuadraticProblem: Hessian must be PSD");
  }
  return spectrum;
}

}  // namespace

QuadraticProblem::QuadraticProblem(Matrix hessian, Vector minimizer)
    : QuadraticProblem(hessian, minimizer, checked_spectrum(hessian, minimizer)) {}

QuadraticProblem::QuadraticProblem(Matrix hessian, Vector minimizer,
                                   Vector spectrum)
    : SmoothProblem(static_cast<std::size_t>(hessian.rows()),
                    spectrum.maxCoeff(), std::max(spectrum.minCoeff(), 0.0)),
      hessian_(std::move(hessian)),
      spectrum_(std::move(spectrum)),
      center_(std::move(minimizer)) {
  set_solution(center_, 0.0);
}

double QuadraticProblem::value(const Vector& x) const {
  const Vector v = x - center_;
  return 0.5 * v.dot(hessian_ * v);
}

void QuadraticProblem::gradient_into(const Vector& x, Vector& out) const {
  out.noalias() = hessian_ * (x - center_);
}

nlohmann::json QuadraticProblem::to_json() const {
  if (!origin_.is_null()) return origin_;
  return {{"kind", "quadratic_matrix"},
          {"hessian", matrix_to_json(hessian_)},
          {"x_star", vector_to_json(center_)}};
}

std::shared_ptr<QuadraticProblem> build_quadratic(
    std::size_t dimension, const std::vector<double>& spectrum,
    const Vector& minimizer, std::uint64_t seed,
    bool require_strong_convexity) {
  if (dimension == 0 || spectrum.size() != dimension ||
      static_cast<std::size_t>(minimizer.size()) != dimension) {
    throw ParameterError("build_quadratic: spectrum and x* must have length d");
  }
  for (double lambda : spectrum) {
    if (!(lambda >= 0.0) || (require_strong_convexity && !(lambda > 0.0))) {
      throw ParameterError(
          "build_quadratic: spectrum must be positive for strong convexity");
    }
  }
  const auto d = static_cast<Eigen::Index>(dimension);
  Rng rng(seed);
  Matrix gaussian(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) gaussian(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Matrix> qr(gaussian);
  Matrix orthogonal = qr.householderQ() * Matrix::Identity(d, d);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (r(j, j) < 0.0) orthogonal.col(j) *= -1.0;
  }
  const Vector eig = Eigen::Map<const Vector>(spectrum.data(), d);
  Matrix hessian = orthogonal * eig.asDiagonal() * orthogonal.transpose();
  hessian = 0.5 * (hessian + hessian.transpose()).eval();

  auto problem = std::make_shared<QuadraticProblem>(std::move(hessian), minimizer);
  problem->set_origin({{"kind", "quadratic"},
                       {"dimension", dimension},
                       {"spectrum", spectrum},
                       {"x_star", vector_to_json(minimizer)},
                       {"seed", seed}});
  return problem;
}

std::shared_ptr<QuadraticProblem> build_least_squares_problem(
    const Vector& minimizer, const Vector& feature_mass) {
  if (minimizer.size() != feature_mass.size() || minimizer.size() == 0) {
    throw ParameterError("least squares: x* and feature masses must match");
  }
  if ((feature_mass.array() <= 0.0).any()) {
    throw ParameterError("least squares: every feature needs positive mass");
  }
  Matrix hessian = feature_mass.asDiagonal();
  auto problem = std::make_shared<QuadraticProblem>(std::move(hessian), minimizer);
  problem->set_origin({{"kind", "least_squares"},
                       {"x_star", vector_to_json(minimizer)},
                       {"feature_mass", vector_to_json(feature_mass)}});
  return problem;
}

// ---------------------------------------------------------------------------
// Hard instance

HardInstance::HardInstance(double mu, double condition_number,
                           std::size_t dimension)
    : SmoothProblem(dimension, mu * condition_number, mu),
      mu_(mu),
      condition_number_(condition_number) {
  if (!(mu > 0.0)) throw ParameterError("hard instance: mu must be > 0");
  if (!(condition_number > 1.0)) {
    throw ParameterError("hard instance: Q must exceed 1");
  }
  if (dimension < 4 || dimension % 2 != 0) {
    throw ParameterError("hard instance: d must be even and >= 4");
  }
  const double root = std::sqrt(condition_number);
  alpha_ = (root + 3.0) / (root + 1.0);
  q_ = (root - 1.0) / (root + 1.0);
  scale_ = mu * (condition_number - 1.0) / 4.0;

  Vector solution(static_cast<Eigen::Index>(dimension));
  double power = 1.0;
  for (Eigen::Index i = 0; i < solution.size(); ++i) {
    power *= q_;
    solution(i) = power;
  }
  const double f_star = value(solution);
  set_solution(std::move(solution), f_star);
}

void HardInstance::apply_a(const Vector& x, Vector& out) const {
  const auto d = x.size();
  for (Eigen::Index i = 0; i < d; ++i) {
    const double diag = (i == d - 1) ? alpha_ : 2.0;
    double v = diag * x(i);
    if (i > 0) v -= x(i - 1);
    if (i + 1 < d) v -= x(i + 1);
    out(i) = v;
  }
}

double HardInstance::value(const Vector& x) const {
  Vector ax(x.size());
  apply_a(x, ax);
  return scale_ * (0.5 * x.dot(ax) - x(0)) + 0.5 * mu_ * x.squaredNorm();
}

void HardInstance::gradient_into(const Vector& x, Vector& out) const {
  out.resize(x.size());
  apply_a(x, out);
  out(0) -= 1.0;
  out *= scale_;
  out += mu_ * x;
}

Matrix HardInstance::matrix_a() const {
  const auto d = static_cast<Eigen::Index>(dimension());
  Matrix a = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    a(i, i) = (i == d - 1) ? alpha_ : 2.0;
    if (i > 0) a(i, i - 1) = -1.0;
    if (i + 1 < d) a(i, i + 1) = -1.0;
  }
  return a;
}

Vector HardInstance::solve_minimizer_dense() const {
  const auto d = static_cast<Eigen::Index>(dimension());
  const Matrix system = scale_ * matrix_a() + mu_ * Matrix::Identity(d, d);
  Vector rhs = Vector::Zero(d);
  rhs(0) = scale_;
  return system.ldlt().solve(rhs);
}

nlohmann::json HardInstance::to_json() const {
  return {{"kind", "hard_instance"},
          {"mu", mu_},
          {"Q", condition_number_},
          {"dimension", dimension()}};
}

std::shared_ptr<HardInstance> build_hard_instance(double mu,
                                                  double condition_number,
                                                  std::size_t dimension) {
  return std::make_shared<HardInstance>(mu, condition_number, dimension);
}

// ---------------------------------------------------------------------------
// Cosine

CosineProblem::CosineProblem(std::size_t dimension)
    : SmoothProblem(dimension, 2.0, 0.0) {
  if (dimension == 0) throw ParameterError("cosine problem: d must be >= 1");
  set_solution(Vector::Zero(static_cast<Eigen::Index>(dimension)),
               static_cast<double>(dimension));
}

double CosineProblem::value(const Vector& x) const {
  return 0.5 * x.squaredNorm() + x.array().cos().sum();
}

void CosineProblem::gradient_into(const Vector& x, Vector& out) const {
  out = (x.array() - x.array().sin()).matrix();
}

nlohmann::json CosineProblem::to_json() const {
  return {{"kind", "cosine"}, {"dimension", dimension()}};
}

// ---------------------------------------------------------------------------
// VI problems

double operator_norm(const Matrix& m, int max_iterations, double tolerance) {
  if (m.size() == 0) return 0.0;
  const Matrix gram = m.transpose() * m;
  Vector v(gram.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v(i) = 1.0 + 0.1 * static_cast<double>(i % 7);
  }
  v.normalize();
  double estimate = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    Vector next = gram * v;
    const double norm = next.norm();
    if (norm == 0.0) return 0.0;
    next /= norm;
    const double previous = estimate;
    estimate = norm;
    v = std::move(next);
    if (std::abs(estimate - previous) <= tolerance * estimate) break;
  }
  return std::sqrt(v.dot(gram * v));
}

BilinearVI::BilinearVI(Matrix coupling, Vector a, Vector b, double mu_f,
                       FeasibleSet set, Composite composite,
                       std::optional<Vector> solution)
    : VIProblem(static_cast<std::size_t>(coupling.rows() + coupling.cols()),
                mu_f + operator_norm(coupling), mu_f, composite,
                std::move(set)),
      coupling_(std::move(coupling)),
      a_(std::move(a)),
      b_(std::move(b)) {
  const auto n1 = coupling_.rows();
  const auto n2 = coupling_.cols();
  if (a_.size() != n1 || b_.size() != n2) {
    throw ParameterError("bilinear VI: a must have rows(C), b cols(C) entries");
  }
  if (!(mu_f >= 0.0)) throw ParameterError("bilinear VI: mu_F must be >= 0");
  const auto d = n1 + n2;
  affine_.linear = Matrix::Zero(d, d);
  affine_.linear.topLeftCorner(n1, n1).diagonal().setConstant(mu_f);
  affine_.linear.bottomRightCorner(n2, n2).diagonal().setConstant(mu_f);
  affine_.linear.topRightCorner(n1, n2) = coupling_;
  affine_.linear.bottomLeftCorner(n2, n1) = -coupling_.transpose();
  affine_.offset.resize(d);
  affine_.offset << a_, -b_;

  if (solution) {
    if (solution->size() != d) {
      throw ParameterError("bilinear VI: declared x* has wrong dimension");
    }
    set_solution(std::move(*solution));
    return;
  }
  const auto kind = this->composite().kind;
  if (kind != Composite::Kind::kZero && kind != Composite::Kind::kSquaredNorm) {
    return;
  }
  const Matrix system =
      affine_.linear + this->composite().strong_convexity() * Matrix::Identity(d, d);
  Eigen::FullPivLU<Matrix> lu(system);
  if (!lu.isInvertible()) return;
  Vector candidate = lu.solve(-affine_.offset);
  if (feasible_set().contains(candidate, 1e-12)) set_solution(std::move(candidate));
}

void BilinearVI::field_into(const Vector& x, Vector& out) const {
  out.noalias() = affine_.linear * x;
  out += affine_.offset;
}

nlohmann::json BilinearVI::to_json() const {
  nlohmann::json j = {{"kind", "bilinear_vi"},
                      {"C", matrix_to_json(coupling_)},
                      {"a", vector_to_json(a_)},
                      {"b", vector_to_json(b_)},
                      {"mu_F", strong_monotonicity()},
                      {"set", feasible_set()},
                      {"r", composite()}};
  if (solution()) j["x_star"] = vector_to_json(*solution());
  return j;
}

std::shared_ptr<BilinearVI> build_bilinear_vi(const Matrix& coupling,
                                              const Vector& a, const Vector& b,
                                              double mu_f, FeasibleSet set,
                                              Composite composite,
                                              std::optional<Vector> solution) {
  return std::make_shared<BilinearVI>(coupling, a, b, mu_f, std::move(set),
                                      composite, std::move(solution));
}

double gap(const VIProblem& problem, const Vector& x) {
  const FeasibleSet& set = problem.feasible_set();
  if (!set.bounded()) throw DomainError("gap: feasible set is unbounded");
  const AffineOperator* op = problem.affine();
  if (op == nullptr) throw UnsupportedError("gap: operator is not affine");

  const Matrix& k = op->linear;
  const auto d = k.rows();
  const Matrix sym = 0.5 * (k + k.transpose());
  const double shift = sym.diagonal().mean();
  const double scale = std::max(1.0, k.cwiseAbs().maxCoeff());
  if ((sym - shift * Matrix::Identity(d, d)).cwiseAbs().maxCoeff() >
          1e-12 * scale ||
      shift < 0.0) {
    throw UnsupportedError(
        "gap: symmetric part of F must be a nonnegative multiple of I");
  }

  const Composite& r = problem.composite();
  double r_on_set = 0.0;
  if (r.kind == Composite::Kind::kL1 && set.kind == FeasibleSet::Kind::kSimplex) {
    r_on_set = r.parameter;
  } else if (r.kind != Composite::Kind::kZero) {
    throw UnsupportedError("gap: r must be zero or l1 on the simplex");
  }

  // <K y + c, x - y> = <y, K^T x - c> - shift ||y||^2 + <c, x>.
  const Vector w = k.transpose() * x - op->offset;
  double inner = 0.0;
  if (shift == 0.0) {
    switch (set.kind) {
      case FeasibleSet::Kind::kBall:
        inner = set.radius * w.norm();
        break;
      case FeasibleSet::Kind::kBox:
        inner = (set.lower.array() * w.array())
                    .max(set.upper.array() * w.array())
                    .sum();
        break;
      case FeasibleSet::Kind::kSimplex:
        inner = w.maxCoeff();
        break;
      case FeasibleSet::Kind::kAll:
        break;
    }
  } else {
    const Vector y = set.project(w / (2.0 * shift));
    inner = y.dot(w) - shift * y.squaredNorm();
  }
  return inner + op->offset.dot(x) + r.value(x) - r_on_set;
}

// ---------------------------------------------------------------------------
// JSON factories

std::shared_ptr<SmoothProblem> smooth_problem_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "quadratic") {
    const auto d = j.at("dimension").get<std::size_t>();
    const Vector x_star = j.contains("x_star")
                              ? vector_from_json(j.at("x_star"))
                              : Vector::Zero(static_cast<Eigen::Index>(d));
    return build_quadratic(d, j.at("spectrum").get<std::vector<double>>(),
                           x_star, j.value("seed", std::uint64_t{0}));
  }
  if (kind == "quadratic_matrix") {
    return std::make_shared<QuadraticProblem>(matrix_from_json(j.at("hessian")),
                                              vector_from_json(j.at("x_star")));
  }
  if (kind == "hard_instance") {
    return build_hard_instance(j.at("mu").get<double>(), j.at("Q").get<double>(),
                               j.at("dimension").get<std::size_t>());
  }
  if (kind == "cosine") {
    return std::make_shared<CosineProblem>(j.at("dimension").get<std::size_t>());
  }
  if (kind == "least_squares") {
    return build_least_squares_problem(vector_from_json(j.at("x_star")),
                                       vector_from_json(j.at("feature_mass")));
  }
  throw ParameterError("unknown smooth problem kind \"" + kind + "\"");
}

std::shared_ptr<VIProblem> vi_problem_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind != "bilinear_vi") {
    throw ParameterError("unknown VI problem kind \"" + kind + "\"");
  }
  const Matrix c = matrix_from_json(j.at("C"));
  const Vector a = j.contains("a") ? vector_from_json(j.at("a"))
                                   : Vector::Zero(c.rows());
  const Vector b = j.contains("b") ? vector_from_json(j.at("b"))
                                   : Vector::Zero(c.cols());
  std::optional<Vector> solution;
  if (j.contains("x_star")) solution = vector_from_json(j.at("x_star"));
  return build_bilinear_vi(
      c, a, b, j.value("mu_F", 0.0),
      j.contains("set") ? feasible_set_from_json(j.at("set")) : FeasibleSet::all(),
      j.contains("r") ? composite_from_json(j.at("r")) : Composite::zero(),
      std::move(solution));
}

}  // namespace markovopt
