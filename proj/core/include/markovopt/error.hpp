#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace markovopt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A constructor or operation received arguments outside its domain.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// The kernel has no unique stationary distribution.
class ErgodicityError : public Error {
 public:
  using Error::Error;
};

/// No power up to the budget certified Dobrushin(Q^t) <= 1/4.
class NotMixedError : public Error {
 public:
  explicit NotMixedError(int max_power)
      : Error("kernel not mixed within " + std::to_string(max_power) +
              " powers"),
        max_power_(max_power) {}
  int max_power() const noexcept { return max_power_; }

 private:
  int max_power_;
};

/// The requested combination has no exact implementation.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Operation is undefined on the given input (e.g. gap on an unbounded set).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An oracle's stationary mean does not match the declared field.
class UnbiasednessError : public Error {
 public:
  using Error::Error;
};

/// Iterates became non-finite.
class DivergenceError : public Error {
 public:
  explicit DivergenceError(std::uint64_t iteration)
      : Error("non-finite iterate at iteration " + std::to_string(iteration)),
        iteration_(iteration) {}
  std::uint64_t iteration() const noexcept { return iteration_; }

 private:
  std::uint64_t iteration_;
};

/// An experiment configuration does not resolve.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Rate fitting saw non-positive values or an empty window.
class FitDomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace markovopt
