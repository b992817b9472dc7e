#pragma once

#include <stdexcept>
#include <string>

namespace mgcp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input files and datasets.
class ParseError : public Error {
 public:
  ParseError(const std::string &what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

// Failures of the numerics: Cholesky breakdown, exp overflow, sampler budgets.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class IllConditionedError : public NumericalError {
 public:
  IllConditionedError(const std::string &what, double condition_estimate)
      : NumericalError(what), condition_estimate_(condition_estimate) {}
  double condition_estimate() const { return condition_estimate_; }

 private:
  double condition_estimate_;
};

class OverflowError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace mgcp
