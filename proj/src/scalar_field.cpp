#include "geoflow/scalar_field.hpp"

#include <cmath>
#include <limits>

#include "geoflow/error.hpp"

namespace geoflow {

namespace {

double step_for_order(double x, int order) {
  // Nested central differences lose accuracy; widen the step per layer.
  const double eps = std::numeric_limits<double>::epsilon();
  return std::pow(eps, 1.0 / (3.0 + order)) * std::max(1.0, std::abs(x));
}

double central_difference(const ScalarField& f, std::span<const double> slots, int s, double h) {
  std::vector<double> probe(slots.begin(), slots.end());
  const double x = probe[static_cast<std::size_t>(s)];
  probe[static_cast<std::size_t>(s)] = x + h;
  const double hi = f(probe);
  probe[static_cast<std::size_t>(s)] = x - h;
  const double lo = f(probe);
  return (hi - lo) / (2.0 * h);
}

template <class ExprOp, class NumOp>
ScalarField combine(const ScalarField& a, const ScalarField& b, ExprOp expr_op, NumOp num_op) {
  if (a.is_expression() && b.is_expression()) return ScalarField(expr_op(*a.expression(), *b.expression()));
  ScalarField fa = a;
  ScalarField fb = b;
  return ScalarField(
      a.dimension(),
      [fa, fb, num_op](std::span<const double> s) { return num_op(fa(s), fb(s)); },
      std::max(a.derivative_order(), b.derivative_order()));
}

}  // namespace

ScalarField::ScalarField(Expr e) : n_(e.dimension()), expr_(std::move(e)) {}

ScalarField::ScalarField(int n, Function fn, int derivative_order)
    : n_(n), order_(derivative_order), fn_(std::make_shared<const Function>(std::move(fn))) {}

ScalarField ScalarField::constant(int n, double c) { return ScalarField(Expr::constant(n, c)); }

ScalarField ScalarField::variable(int n, int slot_index) {
  return ScalarField(Expr::variable(n, slot_index));
}

double ScalarField::operator()(std::span<const double> slots) const {
  const double v = expr_ ? expr_->eval(slots) : (*fn_)(slots);
  if (!std::isfinite(v))
    throw EvaluationError("non-finite field value", std::vector<double>(slots.begin(), slots.end()));
  return v;
}

ScalarField ScalarField::partial(int slot_index) const {
  if (expr_) return ScalarField(differentiate(*expr_, slot_index));
  ScalarField self = *this;
  const int order = order_;
  return ScalarField(
      n_,
      [self, slot_index, order](std::span<const double> s) {
        return central_difference(self, s, slot_index,
                                  step_for_order(s[static_cast<std::size_t>(slot_index)], order));
      },
      order_ + 1);
}

ScalarField ScalarField::compose(std::span<const ScalarField> subs) const {
  const int new_n = subs.empty() ? n_ : subs.front().dimension();
  bool all_expr = expr_.has_value();
  for (const auto& s : subs) all_expr = all_expr && s.is_expression();
  if (all_expr) {
    std::vector<Expr> repl;
    repl.reserve(subs.size());
    for (const auto& s : subs) repl.push_back(*s.expression());
    return ScalarField(substitute(*expr_, repl, new_n));
  }
  ScalarField outer = *this;
  std::vector<ScalarField> inner(subs.begin(), subs.end());
  return ScalarField(
      new_n,
      [outer, inner](std::span<const double> s) {
        std::vector<double> mapped(inner.size());
        for (std::size_t k = 0; k < inner.size(); ++k) mapped[k] = inner[k](s);
        return outer(mapped);
      },
      order_);
}

std::optional<double> ScalarField::constant_value() const {
  if (expr_) return expr_->constant_value();
  return std::nullopt;
}

bool ScalarField::depends_on(int slot_index) const {
  return expr_ ? expr_->depends_on(slot_index) : true;
}

std::string ScalarField::str() const { return expr_ ? expr_->str() : std::string("<callable>"); }

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  return combine(a, b, [](const Expr& x, const Expr& y) { return x + y; },
                 [](double x, double y) { return x + y; });
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  if (b.is_zero()) return a;
  return combine(a, b, [](const Expr& x, const Expr& y) { return x - y; },
                 [](double x, double y) { return x - y; });
}

ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  if (a.is_zero()) return a;
  if (b.is_zero()) return b;
  return combine(a, b, [](const Expr& x, const Expr& y) { return x * y; },
                 [](double x, double y) { return x * y; });
}

ScalarField operator/(const ScalarField& a, const ScalarField& b) {
  if (a.is_zero()) return a;
  return combine(a, b, [](const Expr& x, const Expr& y) { return x / y; },
                 [](double x, double y) { return x / y; });
}

ScalarField operator-(const ScalarField& a) {
  if (a.is_expression()) return ScalarField(-*a.expression());
  return ScalarField::constant(a.dimension(), 0.0) - a;
}

ScalarField operator*(double c, const ScalarField& a) {
  return ScalarField::constant(a.dimension(), c) * a;
}

double auto_step(double x) { return step_for_order(x, 0); }

double fd_partial(const ScalarField& f, std::span<const double> slots, int slot_index,
                  std::optional<double> h) {
  const double step = h ? *h : auto_step(slots[static_cast<std::size_t>(slot_index)]);
  return central_difference(f, slots, slot_index, step);
}

}  // namespace geoflow
