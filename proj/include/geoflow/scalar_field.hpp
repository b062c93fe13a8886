#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geoflow/expr.hpp"

namespace geoflow {

/// A differentiable map of the slot vector (t, q1..qn, dq0, dq1..dqn).
///
/// Expression-backed fields differentiate and compose symbolically. Fields
/// backed by a host callable fall back to central differences; every
/// operation mixing the two kinds yields a callable field.
class ScalarField {
 public:
  using Function = std::function<double(std::span<const double>)>;

  ScalarField() = default;
  ScalarField(Expr e);  // NOLINT(google-explicit-constructor)
  ScalarField(int n, Function fn, int derivative_order = 0);

  static ScalarField constant(int n, double c);
  static ScalarField variable(int n, int slot_index);

  int dimension() const { return n_; }
  bool valid() const { return n_ > 0; }

  /// Throws EvaluationError on domain errors or non-finite results.
  double operator()(std::span<const double> slots) const;

  ScalarField partial(int slot_index) const;

  /// Replaces each slot s by subs[s]; subs.size() must be slot::count(n).
  ScalarField compose(std::span<const ScalarField> subs) const;

  bool is_expression() const { return expr_.has_value(); }
  const Expr* expression() const { return expr_ ? &*expr_ : nullptr; }
  bool is_zero() const { return expr_ && expr_->is_zero(); }
  std::optional<double> constant_value() const;
  /// Exact for expressions; callables are assumed to depend on everything.
  bool depends_on(int slot_index) const;
  std::string str() const;
  int derivative_order() const { return order_; }

  friend ScalarField operator+(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator-(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator*(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator/(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator-(const ScalarField& a);
  friend ScalarField operator*(double c, const ScalarField& a);

 private:
  int n_ = 0;
  int order_ = 0;  // number of finite-difference layers behind a callable
  std::optional<Expr> expr_;
  std::shared_ptr<const Function> fn_;
};

/// Auto step for central differences: cbrt(eps) * max(1, |x|).
double auto_step(double x);

/// Central-difference estimate of the partial derivative along one slot.
double fd_partial(const ScalarField& f, std::span<const double> slots, int slot_index,
                  std::optional<double> h = std::nullopt);

}  // namespace geoflow
