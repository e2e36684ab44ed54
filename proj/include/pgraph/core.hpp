#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pgraph {

using Index = std::int32_t;
using Scalar = double;

using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using SparseMatrix = Eigen::SparseMatrix<Scalar, Eigen::RowMajor, Index>;

/// Tolerance used when checking that a probability row sums to one.
inline constexpr Scalar kProbabilityTolerance = 1e-9;

/// Raised by the text readers; carries the 1-based line of the offending token.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// A model or policy failed its invariants.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Successive approximation hit its sweep cap before reaching tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, Scalar residual, int sweeps)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + " after " +
                           std::to_string(sweeps) + " sweeps)"),
        residual_(residual),
        sweeps_(sweeps) {}

  Scalar residual() const noexcept { return residual_; }
  int sweeps() const noexcept { return sweeps_; }

 private:
  Scalar residual_;
  int sweeps_;
};

/// A search or enumeration would exceed its configured budget.
class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pgraph
