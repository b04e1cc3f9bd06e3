#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "markovopt/prox.hpp"
#include "markovopt/types.hpp"

namespace markovopt {

/// Smooth objective with known constants.
///
/// Implementations are immutable and may be shared across threads.
class SmoothProblem {
 public:
  virtual ~SmoothProblem() = default;

  std::size_t dimension() const noexcept { return dimension_; }
  /// Smoothness constant L.
  double smoothness() const noexcept { return smoothness_; }
  /// Strong convexity constant mu (0 when merely smooth).
  double strong_convexity() const noexcept { return strong_convexity_; }
  const std::optional<Vector>& minimizer() const noexcept { return minimizer_; }
  const std::optional<double>& optimal_value() const noexcept {
    return optimal_value_;
  }

  virtual double value(const Vector& x) const = 0;
  virtual void gradient_into(const Vector& x, Vector& out) const = 0;
  Vector gradient(const Vector& x) const {
    Vector out(static_cast<Eigen::Index>(dimension_));
    gradient_into(x, out);
    return out;
  }

  /// Kind tag plus the parameters needed to rebuild the problem.
  virtual nlohmann::json to_json() const = 0;

 protected:
  SmoothProblem(std::size_t dimension, double smoothness,
                double strong_convexity)
      : dimension_(dimension),
        smoothness_(smoothness),
        strong_convexity_(strong_convexity) {}

  void set_solution(Vector minimizer, double optimal_value) {
    minimizer_ = std::move(minimizer);
    optimal_value_ = optimal_value;
  }

 private:
  std::size_t dimension_;
  double smoothness_;
  double strong_convexity_;
  std::optional<Vector> minimizer_;
  std::optional<double> optimal_value_;
};

/// f(x) = 1/2 (x - x*)^T H (x - x*).
class QuadraticProblem final : public SmoothProblem {
 public:
  /// `hessian` must be symmetric positive semidefinite.
  QuadraticProblem(Matrix hessian, Vector minimizer);

  double value(const Vector& x) const override;
  void gradient_into(const Vector& x, Vector& out) const override;
  nlohmann::json to_json() const override;

  const Matrix& hessian() const noexcept { return hessian_; }
  const Vector& spectrum() const noexcept { return spectrum_; }

  /// Set by build_quadratic so that to_json can rebuild from the seed.
  void set_origin(nlohmann::json origin) { origin_ = std::move(origin); }

 private:
  QuadraticProblem(Matrix hessian, Vector minimizer, Vector spectrum);

  Matrix hessian_;
  Vector spectrum_;
  Vector center_;
  nlohmann::json origin_;
};

/// Quadratic with the given spectrum conjugated by a seeded random
/// orthogonal matrix (Haar, via QR of a Gaussian matrix).
std::shared_ptr<QuadraticProblem> build_quadratic(
    std::size_t dimension, const std::vector<double>& spectrum,
    const Vector& minimizer, std::uint64_t seed,
    bool require_strong_convexity = true);

/// f(x) = mu(Q-1)/4 (x^T A x / 2 - e1^T x) + mu/2 ||x||^2 with A the
/// tridiagonal (-1, 2, -1) matrix whose last diagonal entry is
/// alpha = (sqrt Q + 3)/(sqrt Q + 1). The minimiser is (q, q^2, ..., q^d),
/// q = (sqrt Q - 1)/(sqrt Q + 1); L = mu Q.
class HardInstance final : public SmoothProblem {
 public:
  HardInstance(double mu, double condition_number, std::size_t dimension);

  double value(const Vector& x) const override;
  void gradient_into(const Vector& x, Vector& out) const override;
  nlohmann::json to_json() const override;

  double mu() const noexcept { return mu_; }
  double condition_number() const noexcept { return condition_number_; }
  double alpha() const noexcept { return alpha_; }
  double q() const noexcept { return q_; }
  /// Dense copy of A.
  Matrix matrix_a() const;
  /// Minimiser from a dense linear solve of grad f = 0.
  Vector solve_minimizer_dense() const;

 private:
  void apply_a(const Vector& x, Vector& out) const;

  double mu_;
  double condition_number_;
  double alpha_;
  double q_;
  double scale_;  // mu (Q - 1) / 4
};

std::shared_ptr<HardInstance> build_hard_instance(double mu,
                                                  double condition_number,
                                                  std::size_t dimension);

/// f(x) = ||x||^2 / 2 + sum_i cos(x_i); L = 2, global minimum f* = d at 0.
class CosineProblem final : public SmoothProblem {
 public:
  explicit CosineProblem(std::size_t dimension);

  double value(const Vector& x) const override;
  void gradient_into(const Vector& x, Vector& out) const override;
  nlohmann::json to_json() const override;
};

/// Realisable Markov least squares: f(x) = 1/2 (x - x*)^T diag(s) (x - x*)
/// with s the stationary mass of each feature.
std::shared_ptr<QuadraticProblem> build_least_squares_problem(
    const Vector& minimizer, const Vector& feature_mass);

/// F(x) = K x + c, exposed so that the gap can be computed exactly.
struct AffineOperator {
  Matrix linear;
  Vector offset;
};

/// Variational inequality: find x* in X with
/// <F(x*), x - x*> + r(x) - r(x*) >= 0 for all x in X.
class VIProblem {
 public:
  virtual ~VIProblem() = default;

  std::size_t dimension() const noexcept { return dimension_; }
  /// Lipschitz constant of F.
  double lipschitz() const noexcept { return lipschitz_; }
  /// Strong monotonicity mu_F.
  double strong_monotonicity() const noexcept { return mu_f_; }
  const Composite& composite() const noexcept { return composite_; }
  const FeasibleSet& feasible_set() const noexcept { return set_; }
  double composite_strong_convexity() const {
    return composite_.strong_convexity();
  }
  const std::optional<Vector>& solution() const noexcept { return solution_; }
  /// Diameter of X (infinite when unbounded).
  double diameter() const { return set_.diameter(dimension_); }

  virtual void field_into(const Vector& x, Vector& out) const = 0;
  Vector field(const Vector& x) const {
    Vector out(static_cast<Eigen::Index>(dimension_));
    field_into(x, out);
    return out;
  }
  /// Non-null when F is affine.
  virtual const AffineOperator* affine() const { return nullptr; }
  virtual nlohmann::json to_json() const = 0;

 protected:
  VIProblem(std::size_t dimension, double lipschitz, double mu_f,
            Composite composite, FeasibleSet set)
      : dimension_(dimension),
        lipschitz_(lipschitz),
        mu_f_(mu_f),
        composite_(composite),
        set_(std::move(set)) {}
  void set_solution(Vector x) { solution_ = std::move(x); }

 private:
  std::size_t dimension_;
  double lipschitz_;
  double mu_f_;
  Composite composite_;
  FeasibleSet set_;
  std::optional<Vector> solution_;
};

/// Bilinear saddle-point operator
/// F(x1, x2) = (mu_F x1 + C x2 + a, mu_F x2 - C^T x1 - b).
class BilinearVI final : public VIProblem {
 public:
  BilinearVI(Matrix coupling, Vector a, Vector b, double mu_f,
             FeasibleSet set, Composite composite,
             std::optional<Vector> solution);

  void field_into(const Vector& x, Vector& out) const override;
  const AffineOperator* affine() const override { return &affine_; }
  nlohmann::json to_json() const override;

  const Matrix& coupling() const noexcept { return coupling_; }

 private:
  Matrix coupling_;
  Vector a_;
  Vector b_;
  AffineOperator affine_;
};

/// Builds a bilinear VI; L = mu_F + ||C||_2 with the operator norm from
/// power iteration. When `solution` is empty it is computed for the
/// unconstrained problem (r zero or squared norm) and kept only if it is
/// feasible.
std::shared_ptr<BilinearVI> build_bilinear_vi(
    const Matrix& coupling, const Vector& a, const Vector& b, double mu_f,
    FeasibleSet set = FeasibleSet::all(), Composite composite = Composite::zero(),
    std::optional<Vector> solution = std::nullopt);

/// Largest singular value by power iteration on C^T C.
double operator_norm(const Matrix& m, int max_iterations = 1000,
                     double tolerance = 1e-14);

/// Gap(x) = sup_{y in X} <F(y), x - y> + r(x) - r(y), computed exactly.
///
/// Requires a bounded X, an affine F whose symmetric part is a nonnegative
/// multiple of the identity, and r constant on X (zero, or l1 on the
/// simplex). Throws DomainError for unbounded X and UnsupportedError
/// otherwise.
double gap(const VIProblem& problem, const Vector& x);

std::shared_ptr<SmoothProblem> smooth_problem_from_json(const nlohmann::json& j);
std::shared_ptr<VIProblem> vi_problem_from_json(const nlohmann::json& j);

Vector vector_from_json(const nlohmann::json& j);
nlohmann::json vector_to_json(const Vector& v);
Matrix matrix_from_json(const nlohmann::json& j);
nlohmann::json matrix_to_json(const Matrix& m);

}  // namespace markovopt
