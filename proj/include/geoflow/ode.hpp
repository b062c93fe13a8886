#pragma once

// Explicit Runge-Kutta integration with dense output.

#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace geoflow {

enum class Method { RK4, RK45 };

struct IntegratorConfig {
  Method method = Method::RK45;
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double max_step = std::numeric_limits<double>::infinity();
  double step = 1e-2;         // fixed step for RK4
  double initial_step = 0.0;  // 0 picks one automatically
  long max_steps = 5'000'000;
  bool dense = true;

  /// Throws ContractError on non-positive tolerances or steps.
  void validate() const;
};

using OdeRhs = std::function<void(double t, std::span<const double> y, std::span<double> dy)>;

/// Piecewise-polynomial solution over [a, b]. Each accepted step carries
/// five coefficient vectors; RK45 steps use the Dormand-Prince continuous
/// extension and RK4 steps a cubic Hermite interpolant.
class DenseSolution {
 public:
  int dimension() const { return dim_; }
  double front() const { return t_.front(); }
  double back() const { return t_.back(); }
  std::size_t steps() const { return t_.size() - 1; }
  std::size_t rhs_evaluations() const { return evaluations_; }
  std::span<const double> step_times() const { return t_; }

  void eval(double t, std::span<double> out) const;
  std::vector<double> operator()(double t) const;

 private:
  friend DenseSolution solve_ode(const OdeRhs&, double, double, std::span<const double>, const IntegratorConfig&);

  int dim_ = 0;
  Method method_ = Method::RK45;
  std::vector<double> t_;
  std::vector<double> coeff_;  // 5 * dim per step
  std::size_t evaluations_ = 0;
};

/// Integrates y' = rhs(t, y) from a to b (a < b). Throws IntegrationError on
/// step-size underflow, step-count exhaustion or a non-finite state.
DenseSolution solve_ode(const OdeRhs& rhs, double a, double b, std::span<const double> y0,
                        const IntegratorConfig& cfg = {});

}  // namespace geoflow
