#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace geoflow {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A scalar field produced a non-finite value or hit a domain error.
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, std::vector<double> binding)
      : Error(what), binding_(std::move(binding)) {}
  const std::vector<double>& binding() const { return binding_; }

 private:
  std::vector<double> binding_;
};

/// Syntax or name-resolution failure in the expression language.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset, std::vector<std::string> expected = {})
      : Error(what), offset_(offset), expected_(std::move(expected)) {}
  std::size_t offset() const { return offset_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

/// Singular or inconsistent coordinate change.
class FrameError : public Error {
 public:
  using Error::Error;
};

/// Index-variance or shape mismatch in tensor algebra.
class TypeError : public Error {
 public:
  using Error::Error;
};

/// Singular or indefinite mass metric.
class MetricError : public Error {
 public:
  using Error::Error;
};

/// Non-convergent quadrature or root search.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A precondition on a geometric object was violated (asymmetric input,
/// non-affine connection, time-dependent conservative field, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double t, std::vector<double> last_state)
      : Error(what), t_(t), last_state_(std::move(last_state)) {}
  double time() const { return t_; }
  const std::vector<double>& last_state() const { return last_state_; }

 private:
  double t_;
  std::vector<double> last_state_;
};

}  // namespace geoflow
