#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace neumann_control {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument is outside its admissible range (angles, bounds, mesh size, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Grading discs overlap or a disc reaches a non-adjacent side.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

class MeshQualityError : public Error {
 public:
  using Error::Error;
};

/// Zero-area triangle during assembly.
class AssemblyError : public Error {
 public:
  using Error::Error;
};

/// Pointwise data evaluated to NaN or infinity.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// The linear system is singular or indefinite.
class SolverBreakdown : public Error {
 public:
  using Error::Error;
};

/// An iteration hit its cap. Carries the residual history for diagnostics.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, std::vector<double> history)
      : Error(what), history_(std::move(history)) {}

  const std::vector<double>& history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

/// Residual became NaN or infinite.
class Divergence : public Error {
 public:
  using Error::Error;
};

/// Negative curvature met inside the quadratic subproblem.
class IndefiniteHessian : public Error {
 public:
  using Error::Error;
};

class ClassificationError : public Error {
 public:
  using Error::Error;
};

}  // namespace neumann_control
