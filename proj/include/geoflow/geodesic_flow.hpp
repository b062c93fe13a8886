#pragma once

// Geodesics q̈^α = K^α_λ q̇^λ with q^0 = t and q̇^0 = 1 held exactly, Jacobi
// fields along them, conjugate points and the index form.

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "geoflow/dynamics.hpp"
#include "geoflow/newtonian.hpp"
#include "geoflow/ode.hpp"
#include "geoflow/tangent_connection.hpp"

namespace geoflow {

/// Spatial accelerations q_tt at a slot vector with dq0 = 1.
using SpatialAcceleration = std::function<void(std::span<const double> slots, std::span<double> out)>;

struct GeodesicSample {
  double t;
  std::vector<double> q;   // q^λ, q^0 = t
  std::vector<double> dq;  // q̇^λ, q̇^0 = 1
};

class GeodesicTrajectory {
 public:
  GeodesicTrajectory(int n, DenseSolution sol, IntegratorConfig cfg, std::shared_ptr<const void> source);

  int dimension() const { return n_; }
  double start() const { return sol_.front(); }
  double end() const { return sol_.back(); }
  const DenseSolution& solution() const { return sol_; }
  const IntegratorConfig& config() const { return cfg_; }
  /// Identity of the connection that produced the trajectory (null for ξ or callables).
  const void* source() const { return source_.get(); }

  GeodesicSample sample(double t) const;
  /// Slot vector (t, q, 1, q_t) at t.
  std::vector<double> slots(double t) const;
  /// Uniform grid a + (b−a) k/(count−1).
  std::vector<GeodesicSample> samples(int count) const;

 private:
  int n_;
  DenseSolution sol_;
  IntegratorConfig cfg_;
  std::shared_ptr<const void> source_;
};

struct JacobiSample {
  double t;
  std::vector<double> u;  // u^λ, u^0 = 0
  std::vector<double> w;  // w^λ = (∇u)^λ, w^0 = 0
};

/// Jacobi field u along a geodesic, integrated jointly with the geodesic.
/// State layout: q (n), q_t (n), u (n), w (n).
class JacobiTrajectory {
 public:
  JacobiTrajectory(int n, DenseSolution sol);

  int dimension() const { return n_; }
  double start() const { return sol_.front(); }
  double end() const { return sol_.back(); }
  const DenseSolution& solution() const { return sol_; }

  JacobiSample sample(double t) const;
  std::vector<JacobiSample> samples(int count) const;

 private:
  int n_;
  DenseSolution sol_;
};

GeodesicTrajectory integrate_geodesic(const TangentConnectionField& K, std::span<const double> q0,
                                      std::span<const double> dq0, double a, double b,
                                      const IntegratorConfig& cfg = {});
GeodesicTrajectory integrate_geodesic(const DynamicEquationField& xi, std::span<const double> q0,
                                      std::span<const double> dq0, double a, double b,
                                      const IntegratorConfig& cfg = {});
GeodesicTrajectory integrate_geodesic(int n, const SpatialAcceleration& accel, std::span<const double> q0,
                                      std::span<const double> dq0, double a, double b,
                                      const IntegratorConfig& cfg = {});

/// Integrates u̇ = w + K_μ^α_β q̇^μ u^β and ẇ = R_λμ^α_β u^λ q̇^μ q̇^β + K_μ^α_β q̇^μ w^β
/// from u(a) = u0, w(a) = w0 (spatial parts; temporal parts are 0).
JacobiTrajectory integrate_jacobi(const TangentConnectionField& K, const GeodesicTrajectory& geo,
                                  std::span<const double> u0, std::span<const double> w0,
                                  const IntegratorConfig& cfg = {});

struct ConjugatePoint {
  double t;
  bool degenerate;  // det U touches zero without changing sign
};

/// Zeros of det U(t) on (a, b] for the Jacobi matrix with U(a) = 0, W(a) = I.
std::vector<ConjugatePoint> find_conjugate_points(const TangentConnectionField& K, std::span<const double> q0,
                                                  std::span<const double> dq0, double a, double b,
                                                  const IntegratorConfig& cfg = {});

/// ḡ_ασ R_λμ^σ_ν u^λ v^μ v^ν u^α at p; u, v are (n+1)-component vectors.
double sectional_scalar(const TangentConnectionField& K, const TangentMetric& gbar, const ChartPoint& p,
                        std::span<const double> u, std::span<const double> v);

struct SectionalBounds {
  double min;
  double max;
  /// π/√(−max) when max < 0, the largest spacing of consecutive conjugate points.
  double spacing_bound;
};

/// Extremes of sectional_scalar(∂_i, q̇) over spatial unit vectors (ḡ-normalised)
/// along `count` samples of the geodesic.
SectionalBounds sectional_bounds(const TangentConnectionField& K, const TangentMetric& gbar,
                                 const GeodesicTrajectory& geo, int count = 201);

/// Variation field along a geodesic: spatial u(t) and u̇(t).
struct VariationField {
  std::function<std::vector<double>(double)> u;
  std::function<std::vector<double>(double)> du;
};

/// I(u) = ∫ [ḡ(Du, Du) + ḡ_ασ R_λμ^σ_ν u^λ q̇^μ q̇^ν u^α] dt + ḡ(Du, u)|_a − ḡ(Du, u)|_b
/// with Du = u̇ − K(q̇, u). Throws NumericError when the quadrature does not converge.
double index_form(const TangentConnectionField& K, const TangentMetric& gbar, const GeodesicTrajectory& geo,
                  const VariationField& u, double a, double b);
double index_form(const TangentConnectionField& K, const TangentMetric& gbar, const GeodesicTrajectory& geo,
                  const JacobiTrajectory& u, double a, double b);

}  // namespace geoflow
