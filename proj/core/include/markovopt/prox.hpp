#pragma once

#include <nlohmann/json_fwd.hpp>

#include "markovopt/types.hpp"

namespace markovopt {

/// Simple convex regulariser r.
struct Composite {
  enum class Kind { kZero, kSquaredNorm, kIndicatorBall, kL1 };

  Kind kind = Kind::kZero;
  /// mu_r for kSquaredNorm (r = mu_r/2 ||y||^2), radius for kIndicatorBall,
  /// lambda for kL1 (r = lambda ||y||_1).
  double parameter = 0.0;

  static Composite zero() { return {}; }
  static Composite squared_norm(double mu_r);
  static Composite indicator_ball(double radius);
  static Composite l1(double lambda);

  /// r(y); +infinity outside the ball for kIndicatorBall.
  double value(const Vector& y) const;
  /// Strong convexity modulus mu_r.
  double strong_convexity() const;
};

/// Feasible set X. Balls are centred at the origin; the simplex is the
/// probability simplex.
struct FeasibleSet {
  enum class Kind { kAll, kBall, kBox, kSimplex };

  Kind kind = Kind::kAll;
  double radius = 0.0;
  Vector lower;
  Vector upper;

  static FeasibleSet all() { return {}; }
  static FeasibleSet ball(double radius);
  static FeasibleSet box(Vector lower, Vector upper);
  static FeasibleSet simplex();

  bool bounded() const { return kind != Kind::kAll; }
  bool contains(const Vector& y, double tolerance = 1e-10) const;
  /// Euclidean projection.
  Vector project(const Vector& y) const;
  /// sup_{x,y in X} ||x - y||; infinity when unbounded.
  double diameter(std::size_t dimension) const;
};

/// Euclidean projection onto the probability simplex (sort-based).
Vector project_onto_simplex(const Vector& y);

/// argmin_{y in X} gamma r(y) + 1/2 ||y - x||^2 in closed form.
///
/// Supported pairs: zero with any X; squared norm with any X; indicator
/// ball with X in {all, ball}; l1 with X in {all, box, simplex}.
/// Anything else throws UnsupportedError.
Vector prox(const Composite& r, double gamma, const Vector& x,
            const FeasibleSet& set);

void to_json(nlohmann::json& j, const Composite& r);
void to_json(nlohmann::json& j, const FeasibleSet& set);
Composite composite_from_json(const nlohmann::json& j);
FeasibleSet feasible_set_from_json(const nlohmann::json& j);

}  // namespace markovopt
