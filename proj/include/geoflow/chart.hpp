#pragma once

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "geoflow/scalar_field.hpp"

namespace geoflow {

/// A point (t, q^1..q^n) of the configuration space; index 0 is time.
class ChartPoint {
 public:
  explicit ChartPoint(std::vector<double> coords);
  ChartPoint(double t, std::span<const double> q);

  int dimension() const { return static_cast<int>(coords_.size()) - 1; }
  double time() const { return coords_[0]; }
  double operator[](int lambda) const { return coords_[static_cast<std::size_t>(lambda)]; }
  std::span<const double> coords() const { return coords_; }
  std::span<const double> spatial() const { return std::span<const double>(coords_).subspan(1); }

 private:
  std::vector<double> coords_;
};

/// Holonomic tangent vector (q^λ, q̇^λ) at a chart point.
class TangentVector {
 public:
  TangentVector(ChartPoint base, std::vector<double> dot);

  /// Jet point (t, q, q_t) seen inside TQ: q̇^0 = 1, q̇^i = q_t^i.
  static TangentVector jet(double t, std::span<const double> q, std::span<const double> qt);

  const ChartPoint& base() const { return base_; }
  std::span<const double> dot() const { return dot_; }
  int dimension() const { return base_.dimension(); }

  /// Slot vector (t, q1..qn, dq0, dq1..dqn) for field evaluation.
  std::vector<double> slots() const;

 private:
  ChartPoint base_;
  std::vector<double> dot_;
};

/// Slot vector for a bare chart point; velocities are set to q̇ = (1, 0, ..., 0).
std::vector<double> base_slots(const ChartPoint& p);

/// Partial derivative ∂_λ f at p (λ = 0 is time).
double fd_partial(const ScalarField& f, const ChartPoint& p, int lambda,
                  std::optional<double> h = std::nullopt);

/// Axis-aligned region of jet space used to build probe lattices.
struct ProbeBox {
  using Interval = std::pair<double, double>;

  int n = 1;
  Interval t{0.0, 1.0};
  std::vector<Interval> q;   // n intervals
  std::vector<Interval> dq;  // n intervals

  static ProbeBox unit(int n);

  /// Visits a `per_axis`-point lattice over (t, q) and, when `with_velocities`,
  /// over dq as well. Slot vectors always carry dq0 = 1.
  void for_each(int per_axis, bool with_velocities,
                const std::function<void(std::span<const double>)>& visit) const;
};

/// Time-preserving change of bundle coordinates q' = forward(t, q), with
/// declared inverse q = inverse(t, q').
class FrameMap {
 public:
  FrameMap(std::vector<ScalarField> forward, std::vector<ScalarField> inverse);

  static FrameMap identity(int n);
  /// q'^i = q^i + v^i t
  static FrameMap boost(std::span<const double> velocity);
  /// q' = R(ω t) q in the (q^a, q^b) plane, R the counter-clockwise rotation.
  static FrameMap rotation(int n, double omega, int a = 1, int b = 2);

  int dimension() const { return n_; }
  const std::vector<ScalarField>& forward() const { return forward_; }
  const std::vector<ScalarField>& inverse() const { return inverse_; }

  ChartPoint map(const ChartPoint& p) const;
  ChartPoint unmap(const ChartPoint& p) const;

  /// Spatial Jacobian ∂q'^i/∂q^j at p.
  Eigen::MatrixXd spatial_jacobian(const ChartPoint& p) const;
  /// Full Jacobian ∂q'^α/∂q^λ of the forward map (row/column 0 is time).
  Eigen::MatrixXd jacobian(const ChartPoint& p) const;
  /// Full Jacobian ∂q^α/∂q'^λ of the inverse map, evaluated at primed point p'.
  Eigen::MatrixXd inverse_jacobian(const ChartPoint& primed) const;

  /// ∂_λ forward^i and ∂_λ inverse^i as fields, λ in 0..n.
  const ScalarField& forward_partial(int i, int lambda) const;
  const ScalarField& inverse_partial(int i, int lambda) const;

  /// Throws FrameError if forward∘inverse departs from the identity by more
  /// than `tol` or the spatial Jacobian is singular anywhere on the lattice.
  void validate(const ProbeBox& box, int per_axis = 5, double tol = 1e-9) const;

  /// Largest discrepancy between the inverse map's Jacobian and the matrix
  /// inverse of the forward Jacobian over the lattice.
  double consistency(const ProbeBox& box, int per_axis = 3) const;

 private:
  int n_;
  std::vector<ScalarField> forward_;
  std::vector<ScalarField> inverse_;
  std::vector<ScalarField> forward_d_;  // n x (n+1)
  std::vector<ScalarField> inverse_d_;
};

/// Tangent lift of a frame change: q̇'^0 = q̇^0, q̇'^i = ∂_j q'^i q̇^j + ∂_t q'^i q̇^0.
TangentVector push_vector(const FrameMap& frame, const TangentVector& v);

}  // namespace geoflow
