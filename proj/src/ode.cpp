#include "geoflow/ode.hpp"

#include <algorithm>
#include <cmath>

#include "geoflow/error.hpp"

namespace geoflow {

void IntegratorConfig::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw ContractError("integrator tolerances must be positive");
  if (!(max_step > 0.0)) throw ContractError("integrator max_step must be positive");
  if (!(step > 0.0) || !std::isfinite(step)) throw ContractError("integrator step must be positive");
  if (initial_step < 0.0) throw ContractError("integrator initial_step must not be negative");
  if (max_steps <= 0) throw ContractError("integrator max_steps must be positive");
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

bool finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

void DenseSolution::eval(double t, std::span<double> out) const {
  if (t_.size() < 2) throw ContractError("empty solution");
  const double span = t_.back() - t_.front();
  if (t < t_.front() - 1e-12 * std::max(1.0, span) || t > t_.back() + 1e-12 * std::max(1.0, span))
    throw ContractError("dense output queried outside the integration span");
  t = std::clamp(t, t_.front(), t_.back());
  auto it = std::upper_bound(t_.begin(), t_.end(), t);
  std::size_t k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - t_.begin()) - 1));
  if (k >= t_.size() - 1) k = t_.size() - 2;
  const double h = t_[k + 1] - t_[k];
  const double th = (t - t_[k]) / h;
  const double th1 = 1.0 - th;
  const std::size_t d = static_cast<std::size_t>(dim_);
  const double* c = coeff_.data() + k * 5 * d;
  if (method_ == Method::RK45) {
    for (std::size_t i = 0; i < d; ++i)
      out[i] = c[i] + th * (c[d + i] + th1 * (c[2 * d + i] + th * (c[3 * d + i] + th1 * c[4 * d + i])));
  } else {
    // Cubic Hermite: y0, y1, h f0, h f1.
    const double h00 = (1 + 2 * th) * th1 * th1, h10 = th * th1 * th1, h01 = th * th * (3 - 2 * th),
                 h11 = -th * th * th1;
    for (std::size_t i = 0; i < d; ++i)
      out[i] = h00 * c[i] + h01 * c[d + i] + h10 * c[2 * d + i] + h11 * c[3 * d + i];
  }
}

std::vector<double> DenseSolution::operator()(double t) const {
  std::vector<double> out(static_cast<std::size_t>(dim_));
  eval(t, out);
  return out;
}

DenseSolution solve_ode(const OdeRhs& rhs, double a, double b, std::span<const double> y0_in,
                        const IntegratorConfig& cfg) {
  cfg.validate();
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) throw ContractError("integration span must satisfy a < b");
  if (!finite(y0_in)) throw IntegrationError("non-finite initial state", a, {y0_in.begin(), y0_in.end()});

  const std::size_t d = y0_in.size();
  DenseSolution sol;
  sol.dim_ = static_cast<int>(d);
  sol.method_ = cfg.method;
  sol.t_.push_back(a);

  std::vector<double> y(y0_in.begin(), y0_in.end()), y1(d), tmp(d);
  std::vector<double> k1(d), k2(d), k3(d), k4(d), k5(d), k6(d), k7(d);
  auto f = [&](double t, const std::vector<double>& in, std::vector<double>& out) {
    rhs(t, in, out);
    ++sol.evaluations_;
    if (!finite(out)) throw IntegrationError("non-finite derivative", t, y);
  };

  double t = a;
  const double span = b - a;

  if (cfg.method == Method::RK4) {
    const long steps = std::max<long>(1, static_cast<long>(std::ceil(span / std::min(cfg.step, cfg.max_step) - 1e-9)));
    if (steps > cfg.max_steps) throw IntegrationError("too many fixed steps", a, y);
    const double h = span / static_cast<double>(steps);
    f(t, y, k1);
    for (long s = 0; s < steps; ++s) {
      for (std::size_t i = 0; i < d; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
      f(t + 0.5 * h, tmp, k2);
      for (std::size_t i = 0; i < d; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
      f(t + 0.5 * h, tmp, k3);
      for (std::size_t i = 0; i < d; ++i) tmp[i] = y[i] + h * k3[i];
      f(t + h, tmp, k4);
      for (std::size_t i = 0; i < d; ++i) y1[i] = y[i] + h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
      if (!finite(y1)) throw IntegrationError("non-finite state", t, y);
      const double tn = (s + 1 == steps) ? b : a + span * static_cast<double>(s + 1) / static_cast<double>(steps);
      f(tn, y1, k7);
      const std::size_t base = sol.coeff_.size();
      sol.coeff_.resize(base + 5 * d, 0.0);
      for (std::size_t i = 0; i < d; ++i) {
        sol.coeff_[base + i] = y[i];
        sol.coeff_[base + d + i] = y1[i];
        sol.coeff_[base + 2 * d + i] = h * k1[i];
        sol.coeff_[base + 3 * d + i] = h * k7[i];
      }
      t = tn;
      sol.t_.push_back(t);
      y.swap(y1);
      k1.swap(k7);
    }
    return sol;
  }

  // Adaptive Dormand-Prince with FSAL and a PI step controller.
  f(t, y, k1);
  auto error_norm = [&](const std::vector<double>& ya, const std::vector<double>& yb, const std::vector<double>& e) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(ya[i]), std::abs(yb[i]));
      s += (e[i] / sc) * (e[i] / sc);
    }
    return std::sqrt(s / static_cast<double>(std::max<std::size_t>(d, 1)));
  };

  double h = cfg.initial_step;
  if (h <= 0.0) {
    // Standard starting-step heuristic.
    double d0 = 0.0, d1n = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double sc = cfg.abs_tol + cfg.rel_tol * std::abs(y[i]);
      d0 += (y[i] / sc) * (y[i] / sc);
      d1n += (k1[i] / sc) * (k1[i] / sc);
    }
    d0 = std::sqrt(d0 / static_cast<double>(d));
    d1n = std::sqrt(d1n / static_cast<double>(d));
    double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
    h0 = std::min(h0, span);
    for (std::size_t i = 0; i < d; ++i) tmp[i] = y[i] + h0 * k1[i];
    f(t + h0, tmp, k2);
    double d2 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double sc = cfg.abs_tol + cfg.rel_tol * std::abs(y[i]);
      d2 += ((k2[i] - k1[i]) / sc) * ((k2[i] - k1[i]) / sc);
    }
    d2 = std::sqrt(d2 / static_cast<double>(d)) / h0;
    const double h1 = std::max(d1n, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                                   : std::pow(0.01 / std::max(d1n, d2), 1.0 / 5.0);
    h = std::min(100 * h0, h1);
  }
  h = std::min({h, cfg.max_step, span});

  double err_old = 1e-4;
  bool rejected = false;
  long accepted = 0;
  std::vector<double> err(d);
  while (t < b) {
    if (accepted >= cfg.max_steps) throw IntegrationError("maximum number of steps exceeded", t, y);
    bool last = false;
    if (t + h >= b || t + 1.01 * h >= b) {
      h = b - t;
      last = true;
    }
    if (h <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
      throw IntegrationError("step size underflow", t, y);

    for (std::size_t i = 0; i < d; ++i) tmp[i] = y[i] + h * a21 * k1[i];
    f(t + c2 * h, tmp, k2);
    for (std::size_t i = 0; i < d; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    f(t + c3 * h, tmp, k3);
    for (std::size_t i = 0; i < d; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    f(t + c4 * h, tmp, k4);
    for (std::size_t i = 0; i < d; ++i) tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    f(t + c5 * h, tmp, k5);
    for (std::size_t i = 0; i < d; ++i)
      tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    const double tn = last ? b : t + h;
    f(tn, tmp, k6);
    for (std::size_t i = 0; i < d; ++i)
      y1[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    f(tn, y1, k7);
    for (std::size_t i = 0; i < d; ++i)
      err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    const double en = error_norm(y, y1, err);
    if (!std::isfinite(en)) {
      h *= 0.2;
      rejected = true;
      continue;
    }

    if (en <= 1.0) {
      const std::size_t base = sol.coeff_.size();
      sol.coeff_.resize(base + 5 * d);
      double* c = sol.coeff_.data() + base;
      for (std::size_t i = 0; i < d; ++i) {
        const double ydiff = y1[i] - y[i];
        const double bspl = h * k1[i] - ydiff;
        c[i] = y[i];
        c[d + i] = ydiff;
        c[2 * d + i] = bspl;
        c[3 * d + i] = ydiff - h * k7[i] - bspl;
        c[4 * d + i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      }
      t = tn;
      sol.t_.push_back(t);
      y.swap(y1);
      k1.swap(k7);
      ++accepted;
      double fac = 0.9 * std::pow(std::max(en, 1e-10), -0.7 / 5.0) * std::pow(err_old, 0.4 / 5.0);
      fac = std::clamp(fac, 0.2, 10.0);
      if (rejected) fac = std::min(fac, 1.0);
      err_old = std::max(en, 1e-4);
      rejected = false;
      h = std::min(h * fac, cfg.max_step);
    } else {
      h *= std::max(0.2, 0.9 * std::pow(en, -1.0 / 5.0));
      rejected = true;
    }
  }
  return sol;
}

}  // namespace geoflow
