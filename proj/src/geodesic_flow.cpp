#include "geoflow/geodesic_flow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "geoflow/error.hpp"

namespace geoflow {

namespace {

using Idx = std::size_t;

std::vector<double> slots_from_state(int n, double t, const double* q, const double* dq) {
  std::vector<double> s(static_cast<Idx>(slot::count(n)));
  s[0] = t;
  for (int i = 1; i <= n; ++i) {
    s[static_cast<Idx>(slot::q(i))] = q[i - 1];
    s[static_cast<Idx>(slot::qdot(n, i))] = dq[i - 1];
  }
  s[static_cast<Idx>(slot::qdot(n, 0))] = 1.0;
  return s;
}

void check_initial(int n, std::span<const double> q0, std::span<const double> dq0) {
  if (static_cast<int>(q0.size()) != n || static_cast<int>(dq0.size()) != n)
    throw ContractError("initial condition arrays must have length n");
  for (double x : q0)
    if (!std::isfinite(x)) throw ContractError("initial position is not finite");
  for (double x : dq0)
    if (!std::isfinite(x)) throw ContractError("initial velocity is not finite");
}

void require_tilde(const TangentConnectionField& K) {
  if (!K.tilde())
    throw ContractError("geodesics with q̇^0 = 1 need a connection whose temporal components vanish");
}

Tensor k_tensor(int n) { return Tensor(n + 1, {Variance::Covariant, Variance::Contravariant, Variance::Covariant}); }
Tensor r_tensor(int n) {
  return Tensor(n + 1, {Variance::Covariant, Variance::Covariant, Variance::Contravariant, Variance::Covariant});
}

}  // namespace

GeodesicTrajectory::GeodesicTrajectory(int n, DenseSolution sol, IntegratorConfig cfg,
                                       std::shared_ptr<const void> source)
    : n_(n), sol_(std::move(sol)), cfg_(cfg), source_(std::move(source)) {}

GeodesicSample GeodesicTrajectory::sample(double t) const {
  const auto y = sol_(t);
  GeodesicSample s{t, std::vector<double>(static_cast<Idx>(n_ + 1)), std::vector<double>(static_cast<Idx>(n_ + 1))};
  s.q[0] = t;
  s.dq[0] = 1.0;
  for (int i = 0; i < n_; ++i) {
    s.q[static_cast<Idx>(i + 1)] = y[static_cast<Idx>(i)];
    s.dq[static_cast<Idx>(i + 1)] = y[static_cast<Idx>(n_ + i)];
  }
  return s;
}

std::vector<double> GeodesicTrajectory::slots(double t) const {
  const auto y = sol_(t);
  return slots_from_state(n_, t, y.data(), y.data() + n_);
}

std::vector<GeodesicSample> GeodesicTrajectory::samples(int count) const {
  if (count < 2) throw ContractError("need at least two samples");
  std::vector<GeodesicSample> out;
  const double a = start(), b = end();
  for (int k = 0; k < count; ++k)
    out.push_back(sample(k + 1 == count ? b : a + (b - a) * k / (count - 1)));
  return out;
}

JacobiTrajectory::JacobiTrajectory(int n, DenseSolution sol) : n_(n), sol_(std::move(sol)) {}

JacobiSample JacobiTrajectory::sample(double t) const {
  const auto y = sol_(t);
  JacobiSample s{t, std::vector<double>(static_cast<Idx>(n_ + 1), 0.0), std::vector<double>(static_cast<Idx>(n_ + 1), 0.0)};
  for (int i = 0; i < n_; ++i) {
    s.u[static_cast<Idx>(i + 1)] = y[static_cast<Idx>(2 * n_ + i)];
    s.w[static_cast<Idx>(i + 1)] = y[static_cast<Idx>(3 * n_ + i)];
  }
  return s;
}

std::vector<JacobiSample> JacobiTrajectory::samples(int count) const {
  if (count < 2) throw ContractError("need at least two samples");
  std::vector<JacobiSample> out;
  const double a = start(), b = end();
  for (int k = 0; k < count; ++k) out.push_back(sample(k + 1 == count ? b : a + (b - a) * k / (count - 1)));
  return out;
}

// ---------------------------------------------------------------------------

GeodesicTrajectory integrate_geodesic(int n, const SpatialAcceleration& accel, std::span<const double> q0,
                                      std::span<const double> dq0, double a, double b,
                                      const IntegratorConfig& cfg) {
  check_initial(n, q0, dq0);
  std::vector<double> y0(q0.begin(), q0.end());
  y0.insert(y0.end(), dq0.begin(), dq0.end());
  const OdeRhs rhs = [n, &accel](double t, std::span<const double> y, std::span<double> dy) {
    const auto s = slots_from_state(n, t, y.data(), y.data() + n);
    for (int i = 0; i < n; ++i) dy[static_cast<Idx>(i)] = y[static_cast<Idx>(n + i)];
    accel(s, dy.subspan(static_cast<Idx>(n)));
  };
  return GeodesicTrajectory(n, solve_ode(rhs, a, b, y0, cfg), cfg, nullptr);
}

GeodesicTrajectory integrate_geodesic(const TangentConnectionField& K, std::span<const double> q0,
                                      std::span<const double> dq0, double a, double b,
                                      const IntegratorConfig& cfg) {
  require_tilde(K);
  const auto geo = integrate_geodesic(
      K.dimension(), [&K](std::span<const double> s, std::span<double> out) { K.spatial_acceleration(s, out); }, q0,
      dq0, a, b, cfg);
  return GeodesicTrajectory(K.dimension(), geo.solution(), cfg, K.handle());
}

GeodesicTrajectory integrate_geodesic(const DynamicEquationField& xi, std::span<const double> q0,
                                      std::span<const double> dq0, double a, double b,
                                      const IntegratorConfig& cfg) {
  const int n = xi.dimension();
  return integrate_geodesic(
      n,
      [&xi, n](std::span<const double> s, std::span<double> out) {
        for (int i = 1; i <= n; ++i) out[static_cast<Idx>(i - 1)] = xi.xi(i)(s);
      },
      q0, dq0, a, b, cfg);
}

namespace {

/// Geodesic plus `columns` Jacobi fields; state q, q_t, U (n x columns), W (n x columns).
class JacobiSystem {
 public:
  JacobiSystem(const TangentConnectionField& K, int columns)
      : K_(K), R_(curvature(K)), n_(K.dimension()), cols_(columns), Kt_(k_tensor(n_)), Rt_(r_tensor(n_)) {}

  void operator()(double t, std::span<const double> y, std::span<double> dy) {
    const int n = n_;
    const double* q = y.data();
    const double* v = y.data() + n;
    const auto s = slots_from_state(n, t, q, v);
    K_.components_at(s, Kt_);
    R_.components_at(s, Rt_);
    std::vector<double> vel(static_cast<Idx>(n + 1));
    vel[0] = 1.0;
    for (int i = 0; i < n; ++i) vel[static_cast<Idx>(i + 1)] = v[i];

    for (int i = 1; i <= n; ++i) {
      dy[static_cast<Idx>(i - 1)] = v[i - 1];
      double acc = 0.0;
      for (int l = 0; l <= n; ++l)
        for (int m = 0; m <= n; ++m) acc += Kt_(l, i, m) * vel[static_cast<Idx>(l)] * vel[static_cast<Idx>(m)];
      dy[static_cast<Idx>(n + i - 1)] = acc;
    }

    // Kv(a, b) = K_μ^a_b q̇^μ;  Rvv(a, l) = R_λμ^a_β q̇^μ q̇^β
    Eigen::MatrixXd Kv = Eigen::MatrixXd::Zero(n, n), Rvv = Eigen::MatrixXd::Zero(n, n);
    for (int a = 1; a <= n; ++a)
      for (int b = 1; b <= n; ++b) {
        double kv = 0.0, rvv = 0.0;
        for (int m = 0; m <= n; ++m) {
          kv += Kt_(m, a, b) * vel[static_cast<Idx>(m)];
          for (int be = 0; be <= n; ++be)
            rvv += Rt_(b, m, a, be) * vel[static_cast<Idx>(m)] * vel[static_cast<Idx>(be)];
        }
        Kv(a - 1, b - 1) = kv;
        Rvv(a - 1, b - 1) = rvv;
      }

    const Idx off_u = static_cast<Idx>(2 * n);
    const Idx off_w = off_u + static_cast<Idx>(n * cols_);
    for (int c = 0; c < cols_; ++c)
      for (int a = 0; a < n; ++a) {
        double du = y[off_w + static_cast<Idx>(c * n + a)];
        double dw = 0.0;
        for (int b = 0; b < n; ++b) {
          const double ub = y[off_u + static_cast<Idx>(c * n + b)];
          const double wb = y[off_w + static_cast<Idx>(c * n + b)];
          du += Kv(a, b) * ub;
          dw += Rvv(a, b) * ub + Kv(a, b) * wb;
        }
        dy[off_u + static_cast<Idx>(c * n + a)] = du;
        dy[off_w + static_cast<Idx>(c * n + a)] = dw;
      }
  }

 private:
  const TangentConnectionField& K_;
  CurvatureField R_;
  int n_;
  int cols_;
  Tensor Kt_;
  Tensor Rt_;
};

DenseSolution solve_jacobi(const TangentConnectionField& K, std::span<const double> q0, std::span<const double> dq0,
                           const std::vector<double>& U0, const std::vector<double>& W0, int columns, double a,
                           double b, const IntegratorConfig& cfg) {
  std::vector<double> y0(q0.begin(), q0.end());
  y0.insert(y0.end(), dq0.begin(), dq0.end());
  y0.insert(y0.end(), U0.begin(), U0.end());
  y0.insert(y0.end(), W0.begin(), W0.end());
  auto sys = std::make_shared<JacobiSystem>(K, columns);
  const OdeRhs rhs = [sys](double t, std::span<const double> y, std::span<double> dy) { (*sys)(t, y, dy); };
  return solve_ode(rhs, a, b, y0, cfg);
}

}  // namespace

JacobiTrajectory integrate_jacobi(const TangentConnectionField& K, const GeodesicTrajectory& geo,
                                  std::span<const double> u0, std::span<const double> w0,
                                  const IntegratorConfig& cfg) {
  if (!K.is_linear()) throw ContractError("Jacobi fields need a linear connection");
  require_tilde(K);
  const int n = K.dimension();
  if (geo.dimension() != n || geo.source() != K.identity())
    throw ContractError("geodesic was not produced by this connection");
  if (static_cast<int>(u0.size()) != n || static_cast<int>(w0.size()) != n)
    throw ContractError("Jacobi initial data must have length n");
  const auto s0 = geo.sample(geo.start());
  const std::span<const double> q0(s0.q.data() + 1, static_cast<Idx>(n));
  const std::span<const double> v0(s0.dq.data() + 1, static_cast<Idx>(n));
  return JacobiTrajectory(n, solve_jacobi(K, q0, v0, {u0.begin(), u0.end()}, {w0.begin(), w0.end()}, 1,
                                          geo.start(), geo.end(), cfg));
}

std::vector<ConjugatePoint> find_conjugate_points(const TangentConnectionField& K, std::span<const double> q0,
                                                  std::span<const double> dq0, double a, double b,
                                                  const IntegratorConfig& cfg) {
  if (!K.is_linear()) throw ContractError("conjugate points need a linear connection");
  require_tilde(K);
  const int n = K.dimension();
  check_initial(n, q0, dq0);
  std::vector<double> U0(static_cast<Idx>(n * n), 0.0), W0(static_cast<Idx>(n * n), 0.0);
  for (int i = 0; i < n; ++i) W0[static_cast<Idx>(i * n + i)] = 1.0;
  const DenseSolution sol = solve_jacobi(K, q0, dq0, U0, W0, n, a, b, cfg);

  std::vector<double> y(static_cast<Idx>(2 * n + 2 * n * n));
  auto det = [&](double t) {
    sol.eval(t, y);
    Eigen::Map<const Eigen::MatrixXd> U(y.data() + 2 * n, n, n);
    return U.determinant();
  };

  // Dense scan on a refinement of the step grid.
  std::vector<double> ts;
  const auto steps = sol.step_times();
  for (Idx k = 0; k + 1 < steps.size(); ++k)
    for (int j = 0; j < 4; ++j) ts.push_back(steps[k] + (steps[k + 1] - steps[k]) * j / 4.0);
  ts.push_back(b);
  ts.erase(ts.begin());  // det U(a) = 0 by construction
  std::vector<double> ds;
  for (double t : ts) ds.push_back(det(t));

  std::vector<ConjugatePoint> out;
  auto bisect = [&](double lo, double hi, double flo) {
    while (hi - lo > 1e-9) {
      const double mid = 0.5 * (lo + hi);
      const double fm = det(mid);
      if (fm == 0.0) return mid;
      if ((fm > 0) == (flo > 0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  };
  for (Idx k = 0; k + 1 < ts.size(); ++k) {
    if (ds[k] == 0.0) {
      out.push_back({ts[k], false});
      continue;
    }
    if ((ds[k] > 0) != (ds[k + 1] > 0) && ds[k + 1] != 0.0) out.push_back({bisect(ts[k], ts[k + 1], ds[k]), false});
  }
  if (!ds.empty() && ds.back() == 0.0) out.push_back({ts.back(), false});

  // Tangential zeros: local minima of |det U| without a sign change.
  for (Idx k = 1; k + 1 < ts.size(); ++k) {
    const double m0 = std::abs(ds[k - 1]), m1 = std::abs(ds[k]), m2 = std::abs(ds[k + 1]);
    if (!(m1 <= m0 && m1 <= m2)) continue;
    if ((ds[k - 1] > 0) != (ds[k + 1] > 0)) continue;
    double lo = ts[k - 1], hi = ts[k + 1];
    const double g = (std::sqrt(5.0) - 1) / 2;
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = std::abs(det(x1)), f2 = std::abs(det(x2));
    while (hi - lo > 1e-9) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - g * (hi - lo);
        f1 = std::abs(det(x1));
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + g * (hi - lo);
        f2 = std::abs(det(x2));
      }
    }
    const double tm = 0.5 * (lo + hi);
    if (std::abs(det(tm)) < 1e-12) {
      const bool dup = std::any_of(out.begin(), out.end(), [&](const ConjugatePoint& p) { return std::abs(p.t - tm) < 1e-6; });
      if (!dup) out.push_back({tm, true});
    }
  }
  std::sort(out.begin(), out.end(), [](const ConjugatePoint& x, const ConjugatePoint& y2) { return x.t < y2.t; });
  return out;
}

double sectional_scalar(const TangentConnectionField& K, const TangentMetric& gbar, const ChartPoint& p,
                        std::span<const double> u, std::span<const double> v) {
  const int n = K.dimension();
  if (static_cast<int>(u.size()) != n + 1 || static_cast<int>(v.size()) != n + 1 || gbar.dimension() != n)
    throw ContractError("sectional_scalar needs (n+1)-component vectors");
  const auto s = base_slots(p);
  Tensor R = r_tensor(n);
  curvature(K).components_at(s, R);
  const Eigen::MatrixXd G = gbar.at(s);
  double total = 0.0;
  for (int sg = 0; sg <= n; ++sg) {
    double ru = 0.0;  // R_λμ^σ_ν u^λ v^μ v^ν
    for (int l = 0; l <= n; ++l)
      for (int m = 0; m <= n; ++m)
        for (int nu = 0; nu <= n; ++nu) ru += R(l, m, sg, nu) * u[static_cast<Idx>(l)] * v[static_cast<Idx>(m)] * v[static_cast<Idx>(nu)];
    for (int al = 0; al <= n; ++al) total += G(al, sg) * ru * u[static_cast<Idx>(al)];
  }
  return total;
}

SectionalBounds sectional_bounds(const TangentConnectionField& K, const TangentMetric& gbar,
                                 const GeodesicTrajectory& geo, int count) {
  const int n = K.dimension();
  SectionalBounds out{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
                      std::numeric_limits<double>::infinity()};
  for (const auto& s : geo.samples(count)) {
    const ChartPoint p(s.q);
    const Eigen::MatrixXd G = gbar.at(p);
    for (int i = 1; i <= n; ++i) {
      std::vector<double> u(static_cast<Idx>(n + 1), 0.0);
      u[static_cast<Idx>(i)] = 1.0 / std::sqrt(G(i, i));
      const double val = sectional_scalar(K, gbar, p, u, s.dq);
      out.min = std::min(out.min, val);
      out.max = std::max(out.max, val);
    }
  }
  if (out.max < 0.0) out.spacing_bound = std::numbers::pi / std::sqrt(-out.max);
  return out;
}

namespace {

double index_form_impl(const TangentConnectionField& K, const TangentMetric& gbar, const GeodesicTrajectory& geo,
                       const std::function<void(double, std::vector<double>&, std::vector<double>&)>& field,
                       std::vector<double> breaks, double a, double b) {
  if (!K.is_linear()) throw ContractError("index form needs a linear connection");
  const int n = K.dimension();
  if (gbar.dimension() != n || geo.dimension() != n) throw ContractError("dimension mismatch in index form");
  if (!(a < b) || a < geo.start() - 1e-12 || b > geo.end() + 1e-12)
    throw ContractError("index form interval must lie inside the geodesic span");

  const CurvatureField R = curvature(K);
  Tensor Kt = k_tensor(n), Rt = r_tensor(n);
  std::vector<double> u(static_cast<Idx>(n + 1)), du(static_cast<Idx>(n + 1));

  // Returns ḡ(Du, Du) + curvature term, and ḡ(Du, u) through `boundary`.
  auto pieces = [&](double t, double* boundary) {
    const auto s = geo.slots(t);
    K.components_at(s, Kt);
    field(t, u, du);
    std::vector<double> vel(static_cast<Idx>(n + 1));
    for (int l = 0; l <= n; ++l) vel[static_cast<Idx>(l)] = s[static_cast<Idx>(slot::qdot(n, l))];
    std::vector<double> Du(static_cast<Idx>(n + 1), 0.0);
    for (int al = 1; al <= n; ++al) {
      double k = 0.0;
      for (int m = 0; m <= n; ++m)
        for (int be = 0; be <= n; ++be) k += Kt(m, al, be) * vel[static_cast<Idx>(m)] * u[static_cast<Idx>(be)];
      Du[static_cast<Idx>(al)] = du[static_cast<Idx>(al)] - k;
    }
    const Eigen::MatrixXd G = gbar.at(s);
    double kinetic = 0.0, bnd = 0.0;
    for (int x = 0; x <= n; ++x)
      for (int y = 0; y <= n; ++y) {
        kinetic += G(x, y) * Du[static_cast<Idx>(x)] * Du[static_cast<Idx>(y)];
        bnd += G(x, y) * Du[static_cast<Idx>(x)] * u[static_cast<Idx>(y)];
      }
    if (boundary) *boundary = bnd;
    R.components_at(s, Rt);
    double curv = 0.0;
    for (int sg = 0; sg <= n; ++sg) {
      double ru = 0.0;
      for (int l = 0; l <= n; ++l)
        for (int m = 0; m <= n; ++m)
          for (int nu = 0; nu <= n; ++nu)
            ru += Rt(l, m, sg, nu) * u[static_cast<Idx>(l)] * vel[static_cast<Idx>(m)] * vel[static_cast<Idx>(nu)];
      for (int al = 0; al <= n; ++al) curv += G(al, sg) * ru * u[static_cast<Idx>(al)];
    }
    return kinetic + curv;
  };

  breaks.push_back(a);
  breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::remove_if(breaks.begin(), breaks.end(), [&](double t) { return t < a || t > b; }), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(), [](double x, double y) { return std::abs(x - y) < 1e-14; }),
               breaks.end());

  // The integrand is smooth between breakpoints, so one Kronrod pass per piece usually
  // suffices. Boost's tolerance is relative to each piece's own value, which recurses
  // forever on pieces that integrate to ~0; judge the error against L1 instead.
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  const auto f = [&](double t) { return pieces(t, nullptr); };
  double total = 0.0, total_err = 0.0, total_l1 = 0.0;
  for (Idx k = 0; k + 1 < breaks.size(); ++k) {
    double err = 0.0, l1 = 0.0;
    double v = GK::integrate(f, breaks[k], breaks[k + 1], 0, 0.0, &err, &l1);
    if (err > 1e-13 * std::max(1.0, l1)) v = GK::integrate(f, breaks[k], breaks[k + 1], 12, 1e-13, &err, &l1);
    total += v;
    total_err += err;
    total_l1 += l1;
  }
  if (!std::isfinite(total) || total_err > 1e-10 * std::max(1.0, total_l1))
    throw NumericError("index-form quadrature did not converge");
  double ba = 0.0, bb = 0.0;
  pieces(a, &ba);
  pieces(b, &bb);
  return total + ba - bb;
}

}  // namespace

double index_form(const TangentConnectionField& K, const TangentMetric& gbar, const GeodesicTrajectory& geo,
                  const VariationField& field, double a, double b) {
  const int n = K.dimension();
  const auto st = geo.solution().step_times();
  return index_form_impl(
      K, gbar, geo,
      [&](double t, std::vector<double>& u, std::vector<double>& du) {
        const auto x = field.u(t), dx = field.du(t);
        if (static_cast<int>(x.size()) != n || static_cast<int>(dx.size()) != n)
          throw ContractError("variation field must return n components");
        u[0] = du[0] = 0.0;
        for (int i = 0; i < n; ++i) {
          u[static_cast<Idx>(i + 1)] = x[static_cast<Idx>(i)];
          du[static_cast<Idx>(i + 1)] = dx[static_cast<Idx>(i)];
        }
      },
      {st.begin(), st.end()}, a, b);
}

double index_form(const TangentConnectionField& K, const TangentMetric& gbar, const GeodesicTrajectory& geo,
                  const JacobiTrajectory& jac, double a, double b) {
  const int n = K.dimension();
  if (jac.dimension() != n) throw ContractError("Jacobi field dimension mismatch");
  Tensor Kt = k_tensor(n);
  const auto st = geo.solution().step_times();
  const auto sj = jac.solution().step_times();
  std::vector<double> breaks(st.begin(), st.end());
  breaks.insert(breaks.end(), sj.begin(), sj.end());
  return index_form_impl(
      K, gbar, geo,
      [&](double t, std::vector<double>& u, std::vector<double>& du) {
        // u̇ = w + K(q̇, u) so that Du = w.
        const auto s = jac.sample(t);
        const auto slots = geo.slots(t);
        K.components_at(slots, Kt);
        for (int al = 0; al <= n; ++al) {
          double k = 0.0;
          for (int m = 0; m <= n; ++m)
            for (int be = 0; be <= n; ++be)
              k += Kt(m, al, be) * slots[static_cast<Idx>(slot::qdot(n, m))] * s.u[static_cast<Idx>(be)];
          u[static_cast<Idx>(al)] = s.u[static_cast<Idx>(al)];
          du[static_cast<Idx>(al)] = al == 0 ? 0.0 : s.w[static_cast<Idx>(al)] + k;
        }
      },
      std::move(breaks), a, b);
}

}  // namespace geoflow
