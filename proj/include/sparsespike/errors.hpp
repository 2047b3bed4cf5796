#pragma once

#include <stdexcept>
#include <string>

namespace sparsespike {

// An iterative routine ran out of iterations; carries the last residual seen
// so callers can decide whether the partial answer is still usable.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : std::runtime_error(what + " (last residual " +
                           std::to_string(last_residual) + ")"),
        last_residual_(last_residual) {}

  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

// The input is degenerate for the requested operation, e.g. a threshold that
// zeroes the whole matrix or a witness block with nonpositive trace.
class DegenerateInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sparsespike
