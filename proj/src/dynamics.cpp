#include "geoflow/dynamics.hpp"

#include <cmath>
#include <string>

#include "geoflow/error.hpp"

namespace geoflow {

namespace {

bool close(double x, double y, double tol) {
  return std::abs(x - y) <= tol * std::max({1.0, std::abs(x), std::abs(y)});
}

void require_base_field(const ScalarField& f, int n, const char* what) {
  if (f.dimension() != n) throw ContractError(std::string(what) + " has the wrong dimension");
  if (!f.is_expression()) return;
  for (int l = 1; l <= n; ++l)
    if (f.depends_on(slot::qdot(n, l)))
      throw ContractError(std::string(what) + " must not depend on velocities");
}

ScalarField velocity(int n, int j) { return ScalarField::variable(n, slot::qdot(n, j)); }

}  // namespace

QuadraticCoefficients QuadraticCoefficients::zero(int n) {
  QuadraticCoefficients c;
  c.n = n;
  const ScalarField z = ScalarField::constant(n, 0.0);
  c.a.assign(static_cast<std::size_t>(n * n * n), z);
  c.b.assign(static_cast<std::size_t>(n * n), z);
  c.f.assign(static_cast<std::size_t>(n), z);
  return c;
}

DynamicEquationField::DynamicEquationField(std::vector<ScalarField> xi,
                                           std::optional<QuadraticCoefficients> quadratic,
                                           bool conservative)
    : n_(static_cast<int>(xi.size())),
      xi_(std::move(xi)),
      quadratic_(std::move(quadratic)),
      conservative_(conservative) {
  if (n_ < 1 || n_ > 16) throw ContractError("dynamic equation needs 1 <= n <= 16 components");
  for (const auto& f : xi_)
    if (f.dimension() != n_) throw ContractError("dynamic equation component has the wrong dimension");
  if (quadratic_) {
    if (quadratic_->n != n_) throw ContractError("quadratic form has the wrong dimension");
    for (const auto& f : quadratic_->a) require_base_field(f, n_, "quadratic coefficient a");
    for (const auto& f : quadratic_->b) require_base_field(f, n_, "quadratic coefficient b");
    for (const auto& f : quadratic_->f) require_base_field(f, n_, "quadratic coefficient f");
  }
}

DynamicEquationField DynamicEquationField::quadratic(QuadraticCoefficients c) {
  const int n = c.n;
  // Symmetry of a in its lower indices.
  const ProbeBox box = ProbeBox::unit(n);
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j)
      for (int k = j + 1; k <= n; ++k) {
        const ScalarField& x = c.A(i, j, k);
        const ScalarField& y = c.A(i, k, j);
        if (x.is_expression() && y.is_expression() && structurally_equal(*x.expression(), *y.expression()))
          continue;
        box.for_each(3, false, [&](std::span<const double> s) {
          if (!close(x(s), y(s), 1e-12))
            throw ContractError("quadratic coefficient a^" + std::to_string(i) + "_jk is not symmetric in j,k");
        });
      }

  std::vector<ScalarField> xi;
  for (int i = 1; i <= n; ++i) {
    ScalarField sum = c.F(i);
    for (int j = 1; j <= n; ++j) {
      sum = sum + c.B(i, j) * velocity(n, j);
      for (int k = 1; k <= n; ++k) sum = sum + c.A(i, j, k) * velocity(n, j) * velocity(n, k);
    }
    xi.push_back(sum);
  }
  return DynamicEquationField(std::move(xi), std::move(c));
}

std::vector<double> DynamicEquationField::acceleration(std::span<const double> slots) const {
  std::vector<double> out(static_cast<std::size_t>(n_));
  for (int i = 0; i < n_; ++i) out[static_cast<std::size_t>(i)] = xi_[static_cast<std::size_t>(i)](slots);
  return out;
}

double DynamicEquationField::quadratic_discrepancy(const ProbeBox& box, int per_axis) const {
  if (!quadratic_) return 0.0;
  const auto& c = *quadratic_;
  double worst = 0.0;
  box.for_each(per_axis, true, [&](std::span<const double> s) {
    for (int i = 1; i <= n_; ++i) {
      double closed = c.F(i)(s);
      for (int j = 1; j <= n_; ++j) {
        const double vj = s[static_cast<std::size_t>(slot::qdot(n_, j))];
        closed += c.B(i, j)(s) * vj;
        for (int k = 1; k <= n_; ++k)
          closed += c.A(i, j, k)(s) * vj * s[static_cast<std::size_t>(slot::qdot(n_, k))];
      }
      worst = std::max(worst, std::abs(closed - xi(i)(s)));
    }
  });
  return worst;
}

// ---------------------------------------------------------------------------

AffineCoefficients AffineCoefficients::zero(int n) {
  AffineCoefficients c;
  c.n = n;
  c.c.assign(static_cast<std::size_t>(n * (n + 1) * (n + 1)), ScalarField::constant(n, 0.0));
  return c;
}

DynamicConnectionField::DynamicConnectionField(int n, std::vector<ScalarField> gamma,
                                               std::optional<AffineCoefficients> affine)
    : n_(n), gamma_(std::move(gamma)), affine_(std::move(affine)) {
  if (static_cast<int>(gamma_.size()) != n_ * (n_ + 1))
    throw ContractError("dynamic connection needs n*(n+1) components");
  if (affine_) {
    if (affine_->n != n_) throw ContractError("affine form has the wrong dimension");
    for (const auto& f : affine_->c) require_base_field(f, n_, "affine coefficient");
  }
}

DynamicConnectionField DynamicConnectionField::affine(AffineCoefficients c) {
  const int n = c.n;
  std::vector<ScalarField> gamma;
  for (int i = 1; i <= n; ++i)
    for (int l = 0; l <= n; ++l) {
      ScalarField g = c(i, l, 0);
      for (int j = 1; j <= n; ++j) g = g + c(i, l, j) * velocity(n, j);
      gamma.push_back(g);
    }
  return DynamicConnectionField(n, std::move(gamma), std::move(c));
}

ReferenceFrameField::ReferenceFrameField(std::vector<ScalarField> gamma) : gamma_(std::move(gamma)) {
  const int n = static_cast<int>(gamma_.size());
  if (n < 1) throw ContractError("reference frame needs n components");
  for (const auto& g : gamma_) require_base_field(g, n, "reference frame component");
}

ReferenceFrameField ReferenceFrameField::rest(int n) {
  return ReferenceFrameField(std::vector<ScalarField>(static_cast<std::size_t>(n), ScalarField::constant(n, 0.0)));
}

// ---------------------------------------------------------------------------

DynamicConnectionField gamma_from_xi(const DynamicEquationField& xi) {
  const int n = xi.dimension();
  const ScalarField half = ScalarField::constant(n, 0.5);
  std::vector<ScalarField> gamma;
  for (int i = 1; i <= n; ++i) {
    std::vector<ScalarField> spatial;
    ScalarField temporal = xi.xi(i);
    for (int j = 1; j <= n; ++j) {
      ScalarField g = half * xi.xi(i).partial(slot::qdot(n, j));
      temporal = temporal - velocity(n, j) * g;
      spatial.push_back(g);
    }
    gamma.push_back(temporal);
    gamma.insert(gamma.end(), spatial.begin(), spatial.end());
  }

  std::optional<AffineCoefficients> affine;
  if (const auto& q = xi.quadratic_form()) {
    AffineCoefficients c = AffineCoefficients::zero(n);
    for (int i = 1; i <= n; ++i) {
      c(i, 0, 0) = q->F(i);
      for (int j = 1; j <= n; ++j) {
        c(i, j, 0) = half * q->B(i, j);
        c(i, 0, j) = half * q->B(i, j);
        for (int k = 1; k <= n; ++k) c(i, j, k) = q->A(i, j, k);
      }
    }
    affine = std::move(c);
  }
  return DynamicConnectionField(n, std::move(gamma), std::move(affine));
}

DynamicEquationField xi_from_gamma(const DynamicConnectionField& gamma) {
  const int n = gamma.dimension();
  std::vector<ScalarField> xi;
  for (int i = 1; i <= n; ++i) {
    ScalarField x = gamma.gamma(i, 0);
    for (int j = 1; j <= n; ++j) x = x + velocity(n, j) * gamma.gamma(i, j);
    xi.push_back(x);
  }

  std::optional<QuadraticCoefficients> quadratic;
  if (const auto& c = gamma.affine_form()) {
    const ScalarField half = ScalarField::constant(n, 0.5);
    QuadraticCoefficients q = QuadraticCoefficients::zero(n);
    for (int i = 1; i <= n; ++i) {
      q.F(i) = (*c)(i, 0, 0);
      for (int j = 1; j <= n; ++j) {
        q.B(i, j) = (*c)(i, 0, j) + (*c)(i, j, 0);
        for (int k = 1; k <= n; ++k) q.A(i, j, k) = half * ((*c)(i, j, k) + (*c)(i, k, j));
      }
    }
    quadratic = std::move(q);
  }
  return DynamicEquationField(std::move(xi), std::move(quadratic));
}

namespace {

class SymmetryTest {
 public:
  explicit SymmetryTest(const DynamicConnectionField& gamma) : gamma_(gamma), n_(gamma.dimension()) {
    if (gamma.affine_form()) return;
    // d_[(k-1)*(n+1)*n + λ*n + (i-1)] = ∂ᵗ_i γ^k_λ
    for (int k = 1; k <= n_; ++k)
      for (int l = 0; l <= n_; ++l)
        for (int i = 1; i <= n_; ++i) d_.push_back(gamma.gamma(k, l).partial(slot::qdot(n_, i)));
  }

  bool holds_at(std::span<const double> s, double tol) const {
    const int n = n_;
    if (const auto& c = gamma_.affine_form()) {
      for (int i = 1; i <= n; ++i)
        for (int l = 0; l <= n; ++l)
          for (int m = l + 1; m <= n; ++m)
            if (!close((*c)(i, l, m)(s), (*c)(i, m, l)(s), tol)) return false;
      return true;
    }
    for (int k = 1; k <= n; ++k)
      for (int i = 1; i <= n; ++i) {
        double rebuilt = d(k, 0, i)(s);
        for (int j = 1; j <= n; ++j) rebuilt += s[static_cast<std::size_t>(slot::qdot(n, j))] * d(k, j, i)(s);
        if (!close(gamma_.gamma(k, i)(s), rebuilt, tol)) return false;
        for (int j = i + 1; j <= n; ++j)
          if (!close(d(k, i, j)(s), d(k, j, i)(s), tol)) return false;
      }
    return true;
  }

 private:
  const ScalarField& d(int k, int lambda, int i) const {
    return d_[static_cast<std::size_t>(((k - 1) * (n_ + 1) + lambda) * n_ + (i - 1))];
  }

  const DynamicConnectionField& gamma_;
  int n_;
  std::vector<ScalarField> d_;
};

}  // namespace

bool is_symmetric(const DynamicConnectionField& gamma, std::span<const TangentVector> probes, double tol) {
  const SymmetryTest test(gamma);
  for (const auto& p : probes)
    if (!test.holds_at(p.slots(), tol)) return false;
  return true;
}

bool is_symmetric(const DynamicConnectionField& gamma, const ProbeBox& box, int per_axis, double tol) {
  const SymmetryTest test(gamma);
  bool ok = true;
  // Affine coefficients do not depend on velocities; a base lattice suffices.
  const bool velocities = !gamma.affine_form().has_value();
  box.for_each(per_axis, velocities, [&](std::span<const double> s) {
    if (ok && !test.holds_at(s, tol)) ok = false;
  });
  return ok;
}

std::vector<double> covariant_differential(const ReferenceFrameField& frame, const TangentVector& jet) {
  const int n = frame.dimension();
  if (jet.dimension() != n) throw ContractError("jet and frame dimensions differ");
  const auto s = jet.slots();
  std::vector<double> out;
  for (int i = 1; i <= n; ++i) out.push_back(jet.dot()[static_cast<std::size_t>(i)] - frame(i)(s));
  return out;
}

DynamicEquationField lift_conservative(std::vector<ScalarField> Xi) {
  const int n = static_cast<int>(Xi.size());
  if (n < 1) throw ContractError("conservative lift needs n components");
  const ProbeBox box = ProbeBox::unit(n);
  for (int i = 0; i < n; ++i) {
    const ScalarField& f = Xi[static_cast<std::size_t>(i)];
    if (f.dimension() != n) throw ContractError("conservative component has the wrong dimension");
    if (f.is_expression()) {
      if (f.depends_on(slot::time()))
        throw ContractError("component " + std::to_string(i + 1) + " depends on time; not conservative");
      continue;
    }
    box.for_each(3, true, [&](std::span<const double> s) {
      std::vector<double> shifted(s.begin(), s.end());
      shifted[0] += 1.0;
      if (!close(f(s), f(shifted), 1e-12))
        throw ContractError("component " + std::to_string(i + 1) + " depends on time; not conservative");
    });
  }
  return DynamicEquationField(std::move(Xi), std::nullopt, true);
}

}  // namespace geoflow
