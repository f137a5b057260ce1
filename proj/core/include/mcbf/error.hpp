// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mcbf {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition (dimensions, finiteness, ranges).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A solver was asked to continue from a state that breaks its invariants,
/// e.g. linearizing at an infeasible point.
class InvalidState : public Error {
 public:
  using Error::Error;
};

/// Numerically degenerate input such as an all-zero covariance or a user that
/// no candidate beam reaches.
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double primal_residual,
                   double dual_residual, int iterations)
      : Error(what),
        primal_residual_(primal_residual),
        dual_residual_(dual_residual),
        iterations_(iterations) {}

  double primal_residual() const noexcept { return primal_residual_; }
  double dual_residual() const noexcept { return dual_residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double primal_residual_;
  double dual_residual_;
  int iterations_;
};

}  // namespace mcbf
