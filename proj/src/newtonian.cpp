#include "geoflow/newtonian.hpp"

#include <cmath>

#include "geoflow/error.hpp"

namespace geoflow {

namespace {

ScalarField zero_field(int n) { return ScalarField::constant(n, 0.0); }

void check_spatial(const ScalarField& f, int n, const char* what) {
  if (f.dimension() != n) throw ContractError(std::string(what) + " has the wrong dimension");
  if (f.is_expression())
    for (int l = 0; l <= n; ++l)
      if (f.depends_on(slot::qdot(n, l))) throw ContractError(std::string(what) + " must not depend on velocities");
}

using Matrix = std::vector<ScalarField>;  // row-major, size d*d

ScalarField det(const Matrix& a, int d, int n) {
  if (d == 1) return a[0];
  if (d == 2) return a[0] * a[3] - a[1] * a[2];
  ScalarField sum = zero_field(n);
  for (int c = 0; c < d; ++c) {
    if (a[static_cast<std::size_t>(c)].is_zero()) continue;
    Matrix minor;
    for (int r = 1; r < d; ++r)
      for (int cc = 0; cc < d; ++cc)
        if (cc != c) minor.push_back(a[static_cast<std::size_t>(r * d + cc)]);
    const ScalarField term = a[static_cast<std::size_t>(c)] * det(minor, d - 1, n);
    sum = (c % 2 == 0) ? sum + term : sum - term;
  }
  return sum;
}

/// Inverse of a spatial matrix field: adjugate over determinant up to n = 4,
/// pointwise numeric inversion above that.
Matrix inverse(const Matrix& m, int n) {
  const int d = n;
  Matrix inv(static_cast<std::size_t>(d * d), zero_field(n));
  if (d <= 4) {
    const ScalarField D = det(m, d, n);
    if (auto c = D.constant_value(); c && *c == 0.0) throw MetricError("mass metric is singular");
    if (d == 1) {
      inv[0] = ScalarField::constant(n, 1.0) / D;
      return inv;
    }
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        Matrix minor;
        for (int r = 0; r < d; ++r)
          for (int c = 0; c < d; ++c)
            if (r != j && c != i) minor.push_back(m[static_cast<std::size_t>(r * d + c)]);
        ScalarField cof = det(minor, d - 1, n);
        if ((i + j) % 2 == 1) cof = -cof;
        inv[static_cast<std::size_t>(i * d + j)] = cof / D;
      }
    return inv;
  }
  auto mat = std::make_shared<Matrix>(m);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      inv[static_cast<std::size_t>(i * d + j)] = ScalarField(
          n,
          [mat, d, i, j](std::span<const double> s) {
            Eigen::MatrixXd M(d, d);
            for (int r = 0; r < d; ++r)
              for (int c = 0; c < d; ++c) M(r, c) = (*mat)[static_cast<std::size_t>(r * d + c)](s);
            Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
            if (!lu.isInvertible()) throw MetricError("mass metric is singular");
            return lu.inverse()(i, j);
          },
          1);
  return inv;
}

void check_invertible(const std::vector<ScalarField>& m, int n, const ProbeBox& box) {
  Eigen::MatrixXd M(n, n);
  box.for_each(3, false, [&](std::span<const double> s) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = m[static_cast<std::size_t>(i * n + j)](s);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) throw MetricError("mass metric is singular at a probe point");
  });
}

std::size_t idx3(int n, int a, int b, int c) {
  return static_cast<std::size_t>((a * (n + 1) + b) * (n + 1) + c);
}

std::vector<ScalarField> metric_partials(const TangentMetric& g) {
  const int n = g.dimension();
  std::vector<ScalarField> d;
  for (int l = 0; l <= n; ++l)
    for (int a = 0; a <= n; ++a)
      for (int b = 0; b <= n; ++b) d.push_back(g(a, b).partial(slot::base(l)));
  return d;
}

}  // namespace

LagrangianCoefficients LagrangianCoefficients::free(int n) {
  LagrangianCoefficients L;
  L.n = n;
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) L.m.push_back(ScalarField::constant(n, i == j ? 1.0 : 0.0));
  L.k.assign(static_cast<std::size_t>(n), zero_field(n));
  L.f = zero_field(n);
  return L;
}

void LagrangianCoefficients::validate(const ProbeBox& box, int per_axis) const {
  if (static_cast<int>(m.size()) != n * n || static_cast<int>(k.size()) != n || !f.valid())
    throw ContractError("lagrangian coefficients have the wrong shape");
  Eigen::MatrixXd M(n, n);
  box.for_each(per_axis, false, [&](std::span<const double> s) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = m[static_cast<std::size_t>(i * n + j)](s);
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, M.cwiseAbs().maxCoeff()))
      throw MetricError("mass metric is not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success) throw MetricError("mass metric is not positive-definite");
  });
}

TangentMetric::TangentMetric(int n, std::vector<ScalarField> g, bool degenerate_allowed, std::string frame)
    : n_(n), g_(std::move(g)), degenerate_(degenerate_allowed), frame_(std::move(frame)) {
  if (static_cast<int>(g_.size()) != (n + 1) * (n + 1)) throw ContractError("metric has the wrong shape");
  for (const auto& c : g_) check_spatial(c, n, "metric component");
  for (int a = 0; a <= n; ++a)
    for (int b = a + 1; b <= n; ++b) {
      const ScalarField& x = (*this)(a, b);
      const ScalarField& y = (*this)(b, a);
      if (x.is_expression() && y.is_expression() && !structurally_equal(*x.expression(), *y.expression()))
        throw MetricError("metric is not symmetric");
    }
}

Eigen::MatrixXd TangentMetric::at(std::span<const double> slots) const {
  Eigen::MatrixXd G(n_ + 1, n_ + 1);
  for (int a = 0; a <= n_; ++a)
    for (int b = 0; b <= n_; ++b) G(a, b) = (*this)(a, b)(slots);
  return G;
}

TangentMetric metric_from_lagrangian(const LagrangianCoefficients& L) {
  const int n = L.n;
  std::vector<ScalarField> g(static_cast<std::size_t>((n + 1) * (n + 1)), zero_field(n));
  g[0] = ScalarField::constant(n, 2.0) * L.f;
  for (int i = 1; i <= n; ++i) {
    g[static_cast<std::size_t>(i)] = L.K(i);
    g[static_cast<std::size_t>(i * (n + 1))] = L.K(i);
    for (int j = 1; j <= n; ++j) g[static_cast<std::size_t>(i * (n + 1) + j)] = L.M(i, j);
  }
  return TangentMetric(n, std::move(g), true);
}

TangentMetric extend_mass_metric(const std::vector<ScalarField>& m, int n, std::string frame) {
  if (static_cast<int>(m.size()) != n * n) throw ContractError("mass metric has the wrong shape");
  std::vector<ScalarField> g(static_cast<std::size_t>((n + 1) * (n + 1)), zero_field(n));
  g[0] = ScalarField::constant(n, 1.0);
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j)
      g[static_cast<std::size_t>(i * (n + 1) + j)] = m[static_cast<std::size_t>((i - 1) * n + (j - 1))];
  return TangentMetric(n, std::move(g), false, std::move(frame));
}

Tensor christoffel(const TangentMetric& g, const ChartPoint& p) {
  const int n = g.dimension();
  const auto slots = base_slots(p);
  std::vector<double> d(static_cast<std::size_t>((n + 1) * (n + 1) * (n + 1)));
  const auto fields = metric_partials(g);
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = fields[k].is_zero() ? 0.0 : fields[k](slots);
  auto D = [&](int l, int a, int b) { return d[idx3(n, l, a, b)]; };
  Tensor c(n + 1, {Variance::Covariant, Variance::Covariant, Variance::Covariant});
  for (int l = 0; l <= n; ++l)
    for (int m = 0; m <= n; ++m)
      for (int v = 0; v <= n; ++v) c(l, m, v) = -0.5 * (D(l, m, v) + D(v, m, l) - D(m, l, v));
  return c;
}

TangentConnectionField lagrangian_connection(const LagrangianCoefficients& L) {
  return lagrangian_connection(L, ProbeBox::unit(L.n));
}

TangentConnectionField lagrangian_connection(const LagrangianCoefficients& L, const ProbeBox& probes) {
  const int n = L.n;
  if (static_cast<int>(L.m.size()) != n * n) throw ContractError("mass metric has the wrong shape");
  check_invertible(L.m, n, probes);
  const TangentMetric g = metric_from_lagrangian(L);
  const Matrix minv = inverse(L.m, n);
  const ScalarField half = ScalarField::constant(n, 0.5);

  // Christoffel symbols as fields.
  std::vector<ScalarField> dg = metric_partials(g);
  auto D = [&](int l, int a, int b) -> const ScalarField& { return dg[idx3(n, l, a, b)]; };
  auto symbol = [&](int l, int m, int v) { return -(half * (D(l, m, v) + D(v, m, l) - D(m, l, v))); };

  std::vector<ScalarField> K(static_cast<std::size_t>((n + 1) * (n + 1) * (n + 1)), zero_field(n));
  for (int l = 0; l <= n; ++l)
    for (int v = l; v <= n; ++v) {
      std::vector<ScalarField> lowered;
      for (int k = 1; k <= n; ++k) lowered.push_back(symbol(l, k, v));
      for (int i = 1; i <= n; ++i) {
        ScalarField sum = zero_field(n);
        for (int k = 1; k <= n; ++k)
          sum = sum + minv[static_cast<std::size_t>((i - 1) * n + (k - 1))] * lowered[static_cast<std::size_t>(k - 1)];
        K[idx3(n, l, i, v)] = sum;
        K[idx3(n, v, i, l)] = sum;
      }
    }
  return TangentConnectionField::linear(n, std::move(K));
}

LagrangeEquation::LagrangeEquation(const LagrangianCoefficients& L)
    : n_(L.n), g_(metric_from_lagrangian(L)), dg_(metric_partials(g_)) {}

void LagrangeEquation::acceleration(std::span<const double> slots, std::span<double> out) const {
  const int n = n_;
  Eigen::MatrixXd M(n, n);
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) M(i - 1, j - 1) = g_(i, j)(slots);
  std::vector<double> d(dg_.size());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = dg_[k].is_zero() ? 0.0 : dg_[k](slots);
  auto D = [&](int l, int a, int b) { return d[idx3(n, l, a, b)]; };
  const double* v = slots.data() + slot::qdot(n, 0);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (int i = 1; i <= n; ++i)
    for (int l = 0; l <= n; ++l)
      for (int m = 0; m <= n; ++m)
        rhs(i - 1) += -0.5 * (D(l, i, m) + D(m, i, l) - D(i, l, m)) * v[l] * v[m];
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  if (!lu.isInvertible()) throw MetricError("mass metric is singular");
  const Eigen::VectorXd a = lu.solve(rhs);
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = a(i);
}

namespace {

struct Compatibility {
  int n;
  DynamicConnectionField gamma;
  std::vector<ScalarField> m;
  std::vector<ScalarField> dm;  // ∂_λ m_ij at (λ*n + i)*n + j

  Compatibility(const DynamicEquationField& xi, const std::vector<ScalarField>& mass)
      : n(xi.dimension()), gamma(gamma_from_xi(xi)), m(mass) {
    if (static_cast<int>(m.size()) != n * n) throw ContractError("mass metric has the wrong shape");
    for (const auto& c : m) check_spatial(c, n, "mass metric component");
    for (int l = 0; l <= n; ++l)
      for (const auto& c : m) dm.push_back(c.partial(slot::base(l)));
  }

  double at(std::span<const double> s) const {
    std::vector<double> M(m.size()), G(static_cast<std::size_t>(n * n));
    for (std::size_t k = 0; k < m.size(); ++k) M[k] = m[k](s);
    for (int k = 1; k <= n; ++k)
      for (int j = 1; j <= n; ++j) G[static_cast<std::size_t>((k - 1) * n + (j - 1))] = gamma.gamma(k, j)(s);
    const double* v = s.data() + slot::qdot(n, 0);
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double r = 0.0;
        for (int l = 0; l <= n; ++l) {
          const ScalarField& d = dm[static_cast<std::size_t>((l * n + i) * n + j)];
          if (!d.is_zero()) r += d(s) * v[l];
        }
        for (int k = 0; k < n; ++k)
          r += M[static_cast<std::size_t>(i * n + k)] * G[static_cast<std::size_t>(k * n + j)] +
               M[static_cast<std::size_t>(j * n + k)] * G[static_cast<std::size_t>(k * n + i)];
        worst = std::max(worst, std::abs(r));
      }
    return worst;
  }
};

}  // namespace

double compatibility_residual(const DynamicEquationField& xi, const std::vector<ScalarField>& m,
                              const ProbeBox& box, int per_axis) {
  const Compatibility c(xi, m);
  double worst = 0.0;
  box.for_each(per_axis, true, [&](std::span<const double> s) { worst = std::max(worst, c.at(s)); });
  return worst;
}

double compatibility_residual(const DynamicEquationField& xi, const std::vector<ScalarField>& m,
                              std::span<const TangentVector> probes) {
  const Compatibility c(xi, m);
  double worst = 0.0;
  for (const auto& p : probes) worst = std::max(worst, c.at(p.slots()));
  return worst;
}

}  // namespace geoflow
