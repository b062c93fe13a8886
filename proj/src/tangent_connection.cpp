#include "geoflow/tangent_connection.hpp"

#include <cmath>
#include <sstream>

#include "geoflow/error.hpp"

namespace geoflow {

namespace {

ScalarField zero_field(int n) { return ScalarField::constant(n, 0.0); }
ScalarField velocity(int n, int lambda) { return ScalarField::variable(n, slot::qdot(n, lambda)); }

std::size_t idx3(int n, int a, int b, int c) {
  return static_cast<std::size_t>((a * (n + 1) + b) * (n + 1) + c);
}

bool close(double x, double y, double tol) {
  return std::abs(x - y) <= tol * std::max({1.0, std::abs(x), std::abs(y)});
}

/// Slot substitution that fixes every velocity slot and maps dq0 -> 1.
std::vector<ScalarField> on_jet_slice(int n) {
  std::vector<ScalarField> subs;
  for (int s = 0; s < slot::count(n); ++s) subs.push_back(ScalarField::variable(n, s));
  subs[static_cast<std::size_t>(slot::qdot(n, 0))] = ScalarField::constant(n, 1.0);
  return subs;
}

}  // namespace

TangentConnectionField TangentConnectionField::make(Kind kind, int n, std::vector<ScalarField> c) {
  if (n < 1 || n > 16) throw ContractError("connection dimension out of range");
  const std::size_t expected =
      static_cast<std::size_t>(kind == Kind::Linear ? (n + 1) * (n + 1) * (n + 1) : (n + 1) * (n + 1));
  if (c.size() != expected) throw ContractError("connection has the wrong number of components");
  auto data = std::make_shared<Data>();
  data->kind = kind;
  data->n = n;
  data->tilde = true;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const ScalarField& f = c[k];
    if (f.dimension() != n) throw ContractError("connection component has the wrong dimension");
    if (kind == Kind::Linear && f.is_expression())
      for (int l = 0; l <= n; ++l)
        if (f.depends_on(slot::qdot(n, l)))
          throw ContractError("linear connection components must not depend on velocities");
    if (f.is_zero()) continue;
    data->nonzero.push_back(static_cast<int>(k));
    const int alpha = kind == Kind::Linear ? static_cast<int>(k / static_cast<std::size_t>(n + 1)) % (n + 1)
                                           : static_cast<int>(k / static_cast<std::size_t>(n + 1));
    if (alpha == 0) data->tilde = false;
  }
  data->c = std::move(c);
  return TangentConnectionField(std::move(data));
}

TangentConnectionField TangentConnectionField::linear(int n, std::vector<ScalarField> components) {
  return make(Kind::Linear, n, std::move(components));
}

TangentConnectionField TangentConnectionField::general(int n, std::vector<ScalarField> components) {
  return make(Kind::General, n, std::move(components));
}

TangentConnectionField TangentConnectionField::zero(int n) {
  return linear(n, std::vector<ScalarField>(static_cast<std::size_t>((n + 1) * (n + 1) * (n + 1)), zero_field(n)));
}

const ScalarField& TangentConnectionField::linear_component(int lambda, int alpha, int beta) const {
  if (!is_linear()) throw ContractError("linear components requested from a general connection");
  return data_->c[idx3(data_->n, lambda, alpha, beta)];
}

ScalarField TangentConnectionField::component(int alpha, int lambda) const {
  const int n = data_->n;
  if (!is_linear()) return data_->c[static_cast<std::size_t>(alpha * (n + 1) + lambda)];
  ScalarField sum = zero_field(n);
  for (int b = 0; b <= n; ++b) sum = sum + linear_component(lambda, alpha, b) * velocity(n, b);
  return sum;
}

std::vector<double> TangentConnectionField::acceleration(std::span<const double> slots) const {
  const int n = data_->n;
  std::vector<double> out(static_cast<std::size_t>(n + 1), 0.0);
  const double* qdot = slots.data() + slot::qdot(n, 0);
  if (is_linear()) {
    for (int k : data_->nonzero) {
      const int beta = k % (n + 1);
      const int alpha = (k / (n + 1)) % (n + 1);
      const int lambda = k / ((n + 1) * (n + 1));
      out[static_cast<std::size_t>(alpha)] +=
          data_->c[static_cast<std::size_t>(k)](slots) * qdot[lambda] * qdot[beta];
    }
  } else {
    for (int k : data_->nonzero) {
      const int lambda = k % (n + 1);
      const int alpha = k / (n + 1);
      out[static_cast<std::size_t>(alpha)] += data_->c[static_cast<std::size_t>(k)](slots) * qdot[lambda];
    }
  }
  return out;
}

void TangentConnectionField::spatial_acceleration(std::span<const double> slots, std::span<double> out) const {
  const auto full = acceleration(slots);
  for (int i = 1; i <= data_->n; ++i) out[static_cast<std::size_t>(i - 1)] = full[static_cast<std::size_t>(i)];
}

Tensor TangentConnectionField::at(const ChartPoint& p) const {
  Tensor t(data_->n + 1, {Variance::Covariant, Variance::Contravariant, Variance::Covariant});
  components_at(base_slots(p), t);
  return t;
}

void TangentConnectionField::components_at(std::span<const double> slots, Tensor& out) const {
  if (!is_linear()) throw ContractError("component tensor requested from a general connection");
  std::fill(out.data().begin(), out.data().end(), 0.0);
  for (int k : data_->nonzero) out.data()[static_cast<std::size_t>(k)] = data_->c[static_cast<std::size_t>(k)](slots);
}

bool TangentConnectionField::is_symmetric(const ProbeBox& box, int per_axis, double tol) const {
  if (!is_linear()) throw ContractError("symmetry test needs a linear connection");
  const int n = data_->n;
  for (int a = 0; a <= n; ++a)
    for (int l = 0; l <= n; ++l)
      for (int m = l + 1; m <= n; ++m) {
        const ScalarField& x = linear_component(l, a, m);
        const ScalarField& y = linear_component(m, a, l);
        if (x.is_expression() && y.is_expression() && structurally_equal(*x.expression(), *y.expression()))
          continue;
        bool ok = true;
        box.for_each(per_axis, false, [&](std::span<const double> s) {
          if (ok && !close(x(s), y(s), tol)) ok = false;
        });
        if (!ok) return false;
      }
  return true;
}

// ---------------------------------------------------------------------------

CurvatureField::CurvatureField(TangentConnectionField K) : K_(std::move(K)) {
  if (!K_.is_linear()) throw ContractError("curvature is only defined here for linear connections");
  const int n = K_.dimension();
  for (int l = 0; l <= n; ++l)
    for (int m = 0; m <= n; ++m)
      for (int a = 0; a <= n; ++a)
        for (int b = 0; b <= n; ++b) dK_.push_back(K_.linear_component(m, a, b).partial(slot::base(l)));
}

const ScalarField& CurvatureField::dK(int lambda, int mu, int alpha, int beta) const {
  const int n1 = K_.dimension() + 1;
  return dK_[static_cast<std::size_t>(((lambda * n1 + mu) * n1 + alpha) * n1 + beta)];
}

Tensor CurvatureField::at(const ChartPoint& p) const {
  Tensor R(K_.dimension() + 1,
           {Variance::Covariant, Variance::Covariant, Variance::Contravariant, Variance::Covariant});
  components_at(base_slots(p), R);
  return R;
}

void CurvatureField::components_at(std::span<const double> slots, Tensor& R) const {
  const int n = K_.dimension();
  Tensor K(n + 1, {Variance::Covariant, Variance::Contravariant, Variance::Covariant});
  K_.components_at(slots, K);
  std::vector<double> d(dK_.size(), 0.0);
  for (std::size_t k = 0; k < dK_.size(); ++k)
    if (!dK_[k].is_zero()) d[k] = dK_[k](slots);
  const int n1 = n + 1;
  auto D = [&](int l, int m, int a, int b) {
    return d[static_cast<std::size_t>(((l * n1 + m) * n1 + a) * n1 + b)];
  };
  for (int l = 0; l <= n; ++l)
    for (int m = 0; m <= n; ++m)
      for (int a = 0; a <= n; ++a)
        for (int b = 0; b <= n; ++b) {
          double r = D(l, m, a, b) - D(m, l, a, b);
          for (int g = 0; g <= n; ++g) r += K(l, g, b) * K(m, a, g) - K(m, g, b) * K(l, a, g);
          R(l, m, a, b) = r;
        }
}

double CurvatureField::max_abs(const ProbeBox& box, int per_axis) const {
  const int n = K_.dimension();
  Tensor R(n + 1, {Variance::Covariant, Variance::Covariant, Variance::Contravariant, Variance::Covariant});
  double worst = 0.0;
  box.for_each(per_axis, false, [&](std::span<const double> s) {
    components_at(s, R);
    worst = std::max(worst, R.max_abs());
  });
  return worst;
}

// ---------------------------------------------------------------------------

TangentConnectionField linear_from_quadratic(const QuadraticCoefficients& c) {
  DynamicEquationField::quadratic(c);  // rejects asymmetric a
  const int n = c.n;
  const ScalarField half = ScalarField::constant(n, 0.5);
  std::vector<ScalarField> K(static_cast<std::size_t>((n + 1) * (n + 1) * (n + 1)), zero_field(n));
  for (int i = 1; i <= n; ++i) {
    K[idx3(n, 0, i, 0)] = c.F(i);
    for (int j = 1; j <= n; ++j) {
      const ScalarField hb = half * c.B(i, j);
      K[idx3(n, 0, i, j)] = hb;
      K[idx3(n, j, i, 0)] = hb;
      for (int k = 1; k <= n; ++k) K[idx3(n, j, i, k)] = c.A(i, j, k);
    }
  }
  return TangentConnectionField::linear(n, std::move(K));
}

DynamicEquationField xi_from_connection(const TangentConnectionField& K, const ReferenceFrameField& frame) {
  const int n = K.dimension();
  if (frame.dimension() != n) throw ContractError("frame and connection dimensions differ");
  const auto slice = on_jet_slice(n);

  std::vector<ScalarField> xi;
  for (int i = 1; i <= n; ++i) {
    ScalarField sum = zero_field(n);
    for (int l = 0; l <= n; ++l) {
      ScalarField k = K.component(i, l);
      if (!K.tilde()) k = k - frame(i) * K.component(0, l);
      sum = sum + k * velocity(n, l);
    }
    xi.push_back(sum.compose(slice));
  }

  std::optional<QuadraticCoefficients> quadratic;
  if (K.is_linear()) {
    auto L = [&](int l, int i, int m) {
      ScalarField k = K.linear_component(l, i, m);
      if (!K.tilde()) k = k - frame(i) * K.linear_component(l, 0, m);
      return k;
    };
    const ScalarField half = ScalarField::constant(n, 0.5);
    QuadraticCoefficients q = QuadraticCoefficients::zero(n);
    for (int i = 1; i <= n; ++i) {
      q.F(i) = L(0, i, 0);
      for (int j = 1; j <= n; ++j) {
        q.B(i, j) = L(0, i, j) + L(j, i, 0);
        for (int k = 1; k <= n; ++k) q.A(i, j, k) = half * (L(j, i, k) + L(k, i, j));
      }
    }
    quadratic = std::move(q);
  }
  return DynamicEquationField(std::move(xi), std::move(quadratic));
}

TangentConnectionField connection_from_gamma(const DynamicConnectionField& gamma) {
  const auto& c = gamma.affine_form();
  if (!c)
    throw ContractError(
        "connection_from_gamma needs an affine dynamic connection; extensions of non-affine "
        "connections are not unique");
  const int n = gamma.dimension();
  std::vector<ScalarField> K(static_cast<std::size_t>((n + 1) * (n + 1) * (n + 1)), zero_field(n));
  for (int i = 1; i <= n; ++i)
    for (int m = 0; m <= n; ++m)
      for (int l = 0; l <= n; ++l) K[idx3(n, m, i, l)] = (*c)(i, m, l);
  return TangentConnectionField::linear(n, std::move(K));
}

TangentConnectionField apply_soldering(const TangentConnectionField& K, const SolderingForm& sigma) {
  if (!K.tilde()) throw ContractError("soldering deformation needs a connection with K^0 = 0");
  const int n = K.dimension();
  if (sigma.s.dimension() != n || static_cast<int>(sigma.h.size()) != n * (n + 1))
    throw ContractError("soldering form has the wrong shape");
  const ScalarField one = ScalarField::constant(n, 1.0);
  const ScalarField q0dot = velocity(n, 0);

  std::vector<ScalarField> out;
  for (int a = 0; a <= n; ++a)
    for (int l = 0; l <= n; ++l) {
      ScalarField k = K.component(a, l);
      if (a > 0) {
        if (l > 0) {
          const ScalarField& h = sigma.H(a, l, n);
          k = k + (h + (sigma.s - one) * h * q0dot);
        } else {
          ScalarField contraction = zero_field(n);
          for (int j = 1; j <= n; ++j) contraction = contraction + sigma.H(a, j, n) * velocity(n, j);
          const ScalarField& h0 = sigma.H(a, 0, n);
          k = k + (h0 - sigma.s * contraction - h0 * q0dot);
        }
      }
      out.push_back(k);
    }
  return TangentConnectionField::general(n, std::move(out));
}

TransformResult transform_connection(const TangentConnectionField& K, const FrameMap& frame,
                                     const ProbeBox& box) {
  const int n = K.dimension();
  if (frame.dimension() != n) throw FrameError("frame and connection dimensions differ");
  frame.validate(box, 3);

  TransformResult result{K, 0.0, {}};
  result.frame_discrepancy = frame.consistency(box);
  if (result.frame_discrepancy > 1e-7) {
    std::ostringstream msg;
    msg << "frame-consistency warning: declared inverse Jacobian differs from the inverted forward "
           "Jacobian by "
        << result.frame_discrepancy;
    result.warnings.push_back(msg.str());
  }

  // P^μ_λ = ∂q^μ/∂q'^λ on the primed chart.
  auto P = [&](int mu, int lambda) -> ScalarField {
    if (mu == 0) return ScalarField::constant(n, lambda == 0 ? 1.0 : 0.0);
    return frame.inverse_partial(mu, lambda);
  };

  // Old-chart slots expressed on the primed chart; velocities pulled back by P.
  std::vector<ScalarField> to_old;
  to_old.push_back(ScalarField::variable(n, slot::time()));
  for (int i = 1; i <= n; ++i) to_old.push_back(frame.inverse()[static_cast<std::size_t>(i - 1)]);
  for (int b = 0; b <= n; ++b) {
    ScalarField v = zero_field(n);
    for (int l = 0; l <= n; ++l) v = v + P(b, l) * velocity(n, l);
    to_old.push_back(v);
  }

  // ∂_γ q'^α and ∂_μ ∂_β q'^α pulled back to the primed chart.
  auto Dx = [&](int a, int g) -> ScalarField {
    if (a == 0) return ScalarField::constant(n, g == 0 ? 1.0 : 0.0);
    return frame.forward_partial(a, g).compose(to_old);
  };
  auto DDx = [&](int a, int m, int b) -> ScalarField {
    if (a == 0) return zero_field(n);
    return frame.forward_partial(a, m).partial(slot::base(b)).compose(to_old);
  };

  if (K.is_linear()) {
    std::vector<ScalarField> Kold;
    for (int m = 0; m <= n; ++m)
      for (int g = 0; g <= n; ++g)
        for (int b = 0; b <= n; ++b) Kold.push_back(K.linear_component(m, g, b).compose(to_old));

    std::vector<ScalarField> out(static_cast<std::size_t>((n + 1) * (n + 1) * (n + 1)), zero_field(n));
    for (int a = 0; a <= n; ++a) {
      std::vector<ScalarField> dx;
      for (int g = 0; g <= n; ++g) dx.push_back(Dx(a, g));
      for (int m = 0; m <= n; ++m)
        for (int b = 0; b <= n; ++b) {
          ScalarField inner = DDx(a, m, b);
          for (int g = 0; g <= n; ++g) inner = inner + dx[static_cast<std::size_t>(g)] * Kold[idx3(n, m, g, b)];
          if (inner.is_zero()) continue;
          for (int l = 0; l <= n; ++l)
            for (int v = 0; v <= n; ++v) out[idx3(n, l, a, v)] = out[idx3(n, l, a, v)] + inner * P(m, l) * P(b, v);
        }
    }
    result.connection = TangentConnectionField::linear(n, std::move(out));
    return result;
  }

  std::vector<ScalarField> out;
  for (int a = 0; a <= n; ++a)
    for (int l = 0; l <= n; ++l) {
      ScalarField sum = zero_field(n);
      for (int m = 0; m <= n; ++m) {
        ScalarField inner = zero_field(n);
        for (int g = 0; g <= n; ++g) inner = inner + Dx(a, g) * K.component(g, m).compose(to_old);
        for (int b = 0; b <= n; ++b) inner = inner + DDx(a, m, b) * to_old[static_cast<std::size_t>(slot::qdot(n, b))];
        sum = sum + inner * P(m, l);
      }
      out.push_back(sum);
    }
  result.connection = TangentConnectionField::general(n, std::move(out));
  return result;
}

CurvatureField curvature(const TangentConnectionField& K) { return CurvatureField(K); }

bool is_flat(const TangentConnectionField& K, const ProbeBox& box, double tol, int per_axis) {
  return curvature(K).max_abs(box, per_axis) < tol;
}

FreeMotion free_motion_equation(const FrameMap& frame) {
  const int n = frame.dimension();
  frame.validate(ProbeBox::unit(n), 3);

  // Inertial-chart slots as functions of the working chart (t, q).
  std::vector<ScalarField> to_inertial;
  to_inertial.push_back(ScalarField::variable(n, slot::time()));
  for (int m = 1; m <= n; ++m) to_inertial.push_back(frame.inverse()[static_cast<std::size_t>(m - 1)]);
  for (int l = 0; l <= n; ++l) to_inertial.push_back(velocity(n, l));

  // Γ^i = ∂_t q^i(t, q̄) and A^i_m = ∂q^i/∂q̄^m, both at q̄ = q̄(t, q).
  std::vector<ScalarField> Gamma, A;
  for (int i = 1; i <= n; ++i) {
    Gamma.push_back(frame.forward_partial(i, 0).compose(to_inertial));
    for (int m = 1; m <= n; ++m) A.push_back(frame.forward_partial(i, m).compose(to_inertial));
  }
  auto G = [&](int i) -> const ScalarField& { return Gamma[static_cast<std::size_t>(i - 1)]; };
  auto Am = [&](int i, int m) -> const ScalarField& { return A[static_cast<std::size_t>((i - 1) * n + (m - 1))]; };
  // ∂²q̄^m/∂q^j∂q^k
  auto H = [&](int m, int j, int k) { return frame.inverse_partial(m, j).partial(slot::q(k)); };

  AffineCoefficients c = AffineCoefficients::zero(n);
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j)
      for (int k = 1; k <= n; ++k) {
        ScalarField sum = zero_field(n);
        for (int m = 1; m <= n; ++m) sum = sum + Am(i, m) * H(m, j, k);
        c(i, k, j) = -sum;
      }
  for (int i = 1; i <= n; ++i)
    for (int k = 1; k <= n; ++k) {
      ScalarField g = G(i).partial(slot::q(k));
      for (int j = 1; j <= n; ++j) g = g - c(i, k, j) * G(j);
      c(i, k, 0) = g;
      c(i, 0, k) = g;
    }
  for (int i = 1; i <= n; ++i) {
    ScalarField g = G(i).partial(slot::time());
    for (int k = 1; k <= n; ++k) g = g - c(i, k, 0) * G(k);
    c(i, 0, 0) = g;
  }

  // Inertial force, written out directly.
  std::vector<ScalarField> relative;
  for (int j = 1; j <= n; ++j) relative.push_back(velocity(n, j) - G(j));
  std::vector<ScalarField> xi;
  for (int i = 1; i <= n; ++i) {
    ScalarField x = G(i).partial(slot::time());
    for (int j = 1; j <= n; ++j) {
      const ScalarField dG = G(i).partial(slot::q(j));
      x = x + velocity(n, j) * dG + dG * relative[static_cast<std::size_t>(j - 1)];
    }
    for (int m = 1; m <= n; ++m)
      for (int j = 1; j <= n; ++j)
        for (int k = 1; k <= n; ++k)
          x = x - Am(i, m) * H(m, j, k) * relative[static_cast<std::size_t>(j - 1)] *
                      relative[static_cast<std::size_t>(k - 1)];
    xi.push_back(x);
  }

  QuadraticCoefficients q = QuadraticCoefficients::zero(n);
  const ScalarField two = ScalarField::constant(n, 2.0);
  for (int i = 1; i <= n; ++i) {
    q.F(i) = c(i, 0, 0);
    for (int j = 1; j <= n; ++j) {
      q.B(i, j) = two * c(i, j, 0);
      for (int k = 1; k <= n; ++k) q.A(i, j, k) = c(i, j, k);
    }
  }
  return FreeMotion{DynamicEquationField(std::move(xi), std::move(q)),
                    DynamicConnectionField::affine(std::move(c))};
}

}  // namespace geoflow
