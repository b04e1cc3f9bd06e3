#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Dense>

namespace markovopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Index of a state in a finite Markov chain.
using StateIndex = std::size_t;

}  // namespace markovopt
