#include "markovopt/prox.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <nlohmann/json.hpp>

#include "markovopt/error.hpp"

namespace markovopt {

Composite Composite::squared_norm(double mu_r) {
  if (!(mu_r >= 0.0)) throw ParameterError("squared_norm: mu_r must be >= 0");
  return {Kind::kSquaredNorm, mu_r};
}

Composite Composite::indicator_ball(double radius) {
  if (!(radius > 0.0)) throw ParameterError("indicator_ball: radius must be > 0");
  return {Kind::kIndicatorBall, radius};
}

Composite Composite::l1(double lambda) {
  if (!(lambda >= 0.0)) throw ParameterError("l1: lambda must be >= 0");
  return {Kind::kL1, lambda};
}

double Composite::value(const Vector& y) const {
  switch (kind) {
    case Kind::kZero:
      return 0.0;
    case Kind::kSquaredNorm:
      return 0.5 * parameter * y.squaredNorm();
    case Kind::kIndicatorBall:
      return y.norm() <= parameter * (1.0 + 1e-12)
                 ? 0.0
                 : std::numeric_limits<double>::infinity();
    case Kind::kL1:
      return parameter * y.lpNorm<1>();
  }
  return 0.0;
}

double Composite::strong_convexity() const {
  return kind == Kind::kSquaredNorm ? parameter : 0.0;
}

FeasibleSet FeasibleSet::ball(double radius) {
  if (!(radius > 0.0)) throw ParameterError("ball: radius must be > 0");
  FeasibleSet s;
  s.kind = Kind::kBall;
  s.radius = radius;
  return s;
}

FeasibleSet FeasibleSet::box(Vector lower, Vector upper) {
  if (lower.size() != upper.size() || lower.size() == 0) {
    throw ParameterError("box: bounds must be non-empty and equal length");
  }
  if ((lower.array() > upper.array()).any()) {
    throw ParameterError("box: lower bound exceeds upper bound");
  }
  FeasibleSet s;
  s.kind = Kind::kBox;
  s.lower = std::move(lower);
  s.upper = std::move(upper);
  return s;
}

FeasibleSet FeasibleSet::simplex() {
  FeasibleSet s;
  s.kind = Kind::kSimplex;
  return s;
}

bool FeasibleSet::contains(const Vector& y, double tolerance) const {
  switch (kind) {
    case Kind::kAll:
      return true;
    case Kind::kBall:
      return y.norm() <= radius + tolerance;
    case Kind::kBox:
      return (y.array() >= lower.array() - tolerance).all() &&
             (y.array() <= upper.array() + tolerance).all();
    case Kind::kSimplex:
      return (y.array() >= -tolerance).all() &&
             std::abs(y.sum() - 1.0) <= tolerance;
  }
  return false;
}

Vector project_onto_simplex(const Vector& y) {
  const auto n = y.size();
  std::vector<double> sorted(y.data(), y.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double running = 0.0;
  double threshold = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    running += sorted[static_cast<std::size_t>(k)];
    const double candidate = (running - 1.0) / static_cast<double>(k + 1);
    if (sorted[static_cast<std::size_t>(k)] - candidate > 0.0) {
      threshold = candidate;
    }
  }
  return (y.array() - threshold).max(0.0).matrix();
}

Vector FeasibleSet::project(const Vector& y) const {
  switch (kind) {
    case Kind::kAll:
      return y;
    case Kind::kBall: {
      const double norm = y.norm();
      return norm <= radius ? y : Vector(y * (radius / norm));
    }
    case Kind::kBox:
      if (y.size() != lower.size()) {
        throw ParameterError("box projection: dimension mismatch");
      }
      return y.cwiseMax(lower).cwiseMin(upper);
    case Kind::kSimplex:
      return project_onto_simplex(y);
  }
  return y;
}

double FeasibleSet::diameter(std::size_t /*dimension*/) const {
  switch (kind) {
    case Kind::kAll:
      return std::numeric_limits<double>::infinity();
    case Kind::kBall:
      return 2.0 * radius;
    case Kind::kBox:
      return (upper - lower).norm();
    case Kind::kSimplex:
      return std::sqrt(2.0);
  }
  return 0.0;
}

namespace {

Vector soft_threshold(const Vector& x, double level) {
  return (x.array().sign() * (x.array().abs() - level).max(0.0)).matrix();
}

[[noreturn]] void unsupported(const char* r_name, const char* set_name) {
  throw UnsupportedError(std::string("prox: no closed form for r = ") +
                         r_name + " on X = " + set_name);
}

const char* set_name(FeasibleSet::Kind kind) {
  switch (kind) {
    case FeasibleSet::Kind::kAll:
      return "all";
    case FeasibleSet::Kind::kBall:
      return "ball";
    case FeasibleSet::Kind::kBox:
      return "box";
    case FeasibleSet::Kind::kSimplex:
      return "simplex";
  }
  return "?";
}

}  // namespace

Vector prox(const Composite& r, double gamma, const Vector& x,
            const FeasibleSet& set) {
  if (!(gamma > 0.0)) throw ParameterError("prox: gamma must be > 0");
  switch (r.kind) {
    case Composite::Kind::kZero:
      return set.project(x);
    case Composite::Kind::kSquaredNorm:
      // Isotropic quadratic: minimiser over X is the projection of the
      // unconstrained minimiser.
      return set.project(x / (1.0 + gamma * r.parameter));
    case Composite::Kind::kIndicatorBall:
      if (set.kind == FeasibleSet::Kind::kAll) {
        return FeasibleSet::ball(r.parameter).project(x);
      }
      if (set.kind == FeasibleSet::Kind::kBall) {
        return FeasibleSet::ball(std::min(r.parameter, set.radius)).project(x);
      }
      unsupported("indicator_ball", set_name(set.kind));
    case Composite::Kind::kL1:
      switch (set.kind) {
        case FeasibleSet::Kind::kAll:
          return soft_threshold(x, gamma * r.parameter);
        case FeasibleSet::Kind::kBox:
          // Separable: clamp of the 1-d soft threshold.
          return set.project(soft_threshold(x, gamma * r.parameter));
        case FeasibleSet::Kind::kSimplex:
          // ||y||_1 == 1 on the simplex, so r is constant there.
          return set.project(x);
        case FeasibleSet::Kind::kBall:
          unsupported("l1", "ball");
      }
  }
  unsupported("?", set_name(set.kind));
}

void to_json(nlohmann::json& j, const Composite& r) {
  switch (r.kind) {
    case Composite::Kind::kZero:
      j = {{"kind", "zero"}};
      break;
    case Composite::Kind::kSquaredNorm:
      j = {{"kind", "sq_norm"}, {"mu_r", r.parameter}};
      break;
    case Composite::Kind::kIndicatorBall:
      j = {{"kind", "indicator_ball"}, {"radius", r.parameter}};
      break;
    case Composite::Kind::kL1:
      j = {{"kind", "l1"}, {"lambda", r.parameter}};
      break;
  }
}

void to_json(nlohmann::json& j, const FeasibleSet& set) {
  switch (set.kind) {
    case FeasibleSet::Kind::kAll:
      j = {{"kind", "all"}};
      break;
    case FeasibleSet::Kind::kBall:
      j = {{"kind", "ball"}, {"radius", set.radius}};
      break;
    case FeasibleSet::Kind::kBox:
      j = {{"kind", "box"},
           {"lower", std::vector<double>(set.lower.data(),
                                         set.lower.data() + set.lower.size())},
           {"upper", std::vector<double>(set.upper.data(),
                                         set.upper.data() + set.upper.size())}};
      break;
    case FeasibleSet::Kind::kSimplex:
      j = {{"kind", "simplex"}};
      break;
  }
}

Composite composite_from_json(const nlohmann::json& j) {
  const auto kind = j.value("kind", std::string("zero"));
  if (kind == "zero") return Composite::zero();
  if (kind == "sq_norm") return Composite::squared_norm(j.at("mu_r").get<double>());
  if (kind == "indicator_ball") {
    return Composite::indicator_ball(j.at("radius").get<double>());
  }
  if (kind == "l1") return Composite::l1(j.at("lambda").get<double>());
  throw ParameterError("unknown composite kind \"" + kind + "\"");
}

FeasibleSet feasible_set_from_json(const nlohmann::json& j) {
  const auto kind = j.value("kind", std::string("all"));
  if (kind == "all") return FeasibleSet::all();
  if (kind == "ball") return FeasibleSet::ball(j.at("radius").get<double>());
  if (kind == "simplex") return FeasibleSet::simplex();
  if (kind == "box") {
    const auto lo = j.at("lower").get<std::vector<double>>();
    const auto hi = j.at("upper").get<std::vector<double>>();
    return FeasibleSet::box(
        Eigen::Map<const Vector>(lo.data(), static_cast<Eigen::Index>(lo.size())),
        Eigen::Map<const Vector>(hi.data(), static_cast<Eigen::Index>(hi.size())));
  }
  throw ParameterError("unknown feasible set kind \"" + kind + "\"");
}

}  // namespace markovopt
