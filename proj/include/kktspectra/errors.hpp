#pragma once

#include <stdexcept>
#include <string>

namespace kkt {

/// Malformed or inconsistent input (dimension mismatch, non-finite data,
/// uncertified KKT point, parse failures).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical kernel failed (eigen-iteration did not converge, LP
/// inconsistency).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Newton-type solve stagnated; carries the residual of the best iterate.
class ConvergenceError : public NumericError {
 public:
  ConvergenceError(const std::string& what, double best_residual)
      : NumericError(what), best_residual_(best_residual) {}
  double best_residual() const { return best_residual_; }

 private:
  double best_residual_;
};

}  // namespace kkt
