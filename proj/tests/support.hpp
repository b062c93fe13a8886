#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "geoflow/chart.hpp"
#include "geoflow/dynamics.hpp"
#include "geoflow/expr.hpp"
#include "geoflow/geodesic_flow.hpp"
#include "geoflow/newtonian.hpp"
#include "geoflow/scalar_field.hpp"
#include "geoflow/tangent_connection.hpp"

namespace testing {

using namespace geoflow;

inline ScalarField F(const std::string& text, int n, const SymbolTable& symbols = {}) {
  return ScalarField(parse(text, n, symbols));
}

inline std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "(%.17g)", x);
  return buf;
}

class Random {
 public:
  explicit Random(unsigned seed) : gen_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }

  /// Random jet point (t, q, 1, q_t) in a modest box.
  std::vector<double> jet(int n, double scale = 1.0) {
    std::vector<double> s(static_cast<std::size_t>(slot::count(n)));
    s[0] = uniform(0.0, 1.0);
    for (int i = 1; i <= n; ++i) {
      s[static_cast<std::size_t>(slot::q(i))] = uniform(-scale, scale);
      s[static_cast<std::size_t>(slot::qdot(n, i))] = uniform(-scale, scale);
    }
    s[static_cast<std::size_t>(slot::qdot(n, 0))] = 1.0;
    return s;
  }

  /// A smooth, mildly nonlinear function of (t, q): c0 + c1 q_a + c2 q_b q_c + c3 sin(t + q_d).
  std::string base_function(int n, double scale) {
    auto q = [&] { return "q" + std::to_string(integer(1, n)); };
    return num(scale * uniform(-1, 1)) + "+" + num(scale * uniform(-1, 1)) + "*" + q() + "+" +
           num(scale * uniform(-1, 1)) + "*" + q() + "*" + q() + "+" + num(scale * uniform(-1, 1)) + "*sin(t+" + q() +
           ")";
  }

  /// Random quadratic coefficients with a restoring f so trajectories stay bounded.
  QuadraticCoefficients quadratic(int n) {
    QuadraticCoefficients c = QuadraticCoefficients::zero(n);
    for (int i = 1; i <= n; ++i) {
      for (int j = 1; j <= n; ++j)
        for (int k = j; k <= n; ++k) {
          c.A(i, j, k) = F(base_function(n, 0.05), n);
          c.A(i, k, j) = c.A(i, j, k);
        }
      for (int j = 1; j <= n; ++j) c.B(i, j) = F(base_function(n, 0.2), n);
      c.F(i) = F("-" + num(uniform(0.5, 2.0)) + "*q" + std::to_string(i) + "+" + base_function(n, 0.2), n);
    }
    return c;
  }

  /// Expression-backed ξ that is not quadratic in the velocities.
  DynamicEquationField non_quadratic(int n) {
    std::vector<ScalarField> xi;
    for (int i = 1; i <= n; ++i) {
      const std::string v = "dq" + std::to_string(integer(1, n));
      const std::string w = "dq" + std::to_string(integer(1, n));
      xi.push_back(F(base_function(n, 0.5) + "+" + num(uniform(-1, 1)) + "*sin(" + v + ")*" + w + "+" +
                         num(uniform(-0.3, 0.3)) + "*" + v + "^3+" + num(uniform(-0.3, 0.3)) + "*exp(" +
                         num(uniform(-0.5, 0.5)) + "*" + w + ")*q1",
                     n));
    }
    return DynamicEquationField(std::move(xi));
  }

  /// Positive-definite, position- and time-dependent quadratic Lagrangian.
  LagrangianCoefficients lagrangian(int n) {
    LagrangianCoefficients L = LagrangianCoefficients::free(n);
    for (int i = 1; i <= n; ++i) {
      const std::string qi = "q" + std::to_string(i);
      L.M(i, i) = F(num(uniform(1.0, 2.0)) + "+" + num(uniform(-0.2, 0.2)) + "*sin(" + qi + ")+" +
                        num(uniform(-0.1, 0.1)) + "*cos(t)",
                    n);
      for (int j = i + 1; j <= n; ++j) {
        L.M(i, j) = F(num(uniform(-0.15, 0.15)) + "+" + num(uniform(-0.05, 0.05)) + "*q" + std::to_string(j), n);
        L.M(j, i) = L.M(i, j);
      }
      L.K(i) = F(num(uniform(-0.3, 0.3)) + "*q" + std::to_string(integer(1, n)) + "+" + num(uniform(-0.2, 0.2)) +
                     "*t*" + qi,
                 n);
    }
    std::string f;
    for (int i = 1; i <= n; ++i) f += "-" + num(uniform(0.5, 2.0)) + "*q" + std::to_string(i) + "^2/2";
    f += "+" + num(uniform(-0.2, 0.2)) + "*cos(t)*q1";
    if (n > 1) f += "+" + num(uniform(-0.2, 0.2)) + "*q1*q2";
    L.f = F(f, n);
    return L;
  }

  SolderingForm soldering(int n) {
    SolderingForm s{F(num(uniform(-2, 2)) + "+" + num(uniform(-0.5, 0.5)) + "*q1", n), {}};
    for (int i = 1; i <= n; ++i)
      for (int l = 0; l <= n; ++l) s.h.push_back(F(base_function(n, 1.0), n));
    return s;
  }

 private:
  std::mt19937 gen_;
};

inline QuadraticCoefficients oscillator(double k) {
  QuadraticCoefficients c = QuadraticCoefficients::zero(1);
  c.F(1) = F("-k*q1", 1, {{"k", k}});
  return c;
}

/// Sup-norm distance of two trajectories on a uniform grid.
inline double sup_distance(const GeodesicTrajectory& a, const GeodesicTrajectory& b, int count = 1001) {
  double worst = 0.0;
  const double t0 = std::max(a.start(), b.start()), t1 = std::min(a.end(), b.end());
  for (int k = 0; k < count; ++k) {
    const double t = t0 + (t1 - t0) * k / (count - 1);
    const auto x = a.sample(t), y = b.sample(t);
    for (std::size_t i = 1; i < x.q.size(); ++i)
      worst = std::max({worst, std::abs(x.q[i] - y.q[i]), std::abs(x.dq[i] - y.dq[i])});
  }
  return worst;
}

inline IntegratorConfig tight(double tol = 1e-12) {
  IntegratorConfig cfg;
  cfg.abs_tol = tol;
  cfg.rel_tol = tol;
  return cfg;
}

}  // namespace testing
