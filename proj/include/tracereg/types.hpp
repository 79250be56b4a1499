#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace tracereg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Caller handed us something malformed: bad dimensions, non-finite entries,
/// out-of-range indices, invalid configuration. Maps to CLI exit code 2.
class InvalidInput : public std::invalid_argument {
 public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

/// The solver itself failed in a way that is not a usage error (numerical
/// breakdown, factorization failure). Maps to CLI exit code 3.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidInput(msg);
}

inline void require_finite(const Eigen::Ref<const Matrix>& a, const std::string& name) {
  if (!a.allFinite()) throw InvalidInput(name + " contains non-finite entries");
}

}  // namespace tracereg
