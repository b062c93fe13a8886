#pragma once

// Connections K = dq^λ ⊗ (∂_λ + K^α_λ ∂̇_α) on the tangent bundle TQ → Q.
//
// A LINEAR connection has K^α_λ = K_λ^α_β(q) q̇^β; a GENERAL one stores
// K^α_λ(q, q̇) directly. Geodesics solve q̈^α = K^α_λ(q, q̇) q̇^λ.

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "geoflow/chart.hpp"
#include "geoflow/dynamics.hpp"
#include "geoflow/scalar_field.hpp"
#include "geoflow/tensor.hpp"

namespace geoflow {

class TangentConnectionField {
 public:
  enum class Kind { Linear, General };

  /// components[(λ*(n+1) + α)*(n+1) + β] = K_λ^α_β(t, q).
  static TangentConnectionField linear(int n, std::vector<ScalarField> components);
  /// components[α*(n+1) + λ] = K^α_λ(t, q, q̇).
  static TangentConnectionField general(int n, std::vector<ScalarField> components);
  static TangentConnectionField zero(int n);

  Kind kind() const { return data_->kind; }
  bool is_linear() const { return data_->kind == Kind::Linear; }
  int dimension() const { return data_->n; }
  /// True when every temporal-upper component K^0 vanishes identically.
  bool tilde() const { return data_->tilde; }

  const ScalarField& linear_component(int lambda, int alpha, int beta) const;
  /// K^α_λ as a field of (t, q, q̇) for either kind.
  ScalarField component(int alpha, int lambda) const;

  /// q̈^α = K^α_λ q̇^λ, α = 0..n, at a slot vector.
  std::vector<double> acceleration(std::span<const double> slots) const;
  /// Spatial part of acceleration() with q̇^0 = 1 assumed in `slots`.
  void spatial_acceleration(std::span<const double> slots, std::span<double> out) const;

  /// Component tensor K_λ^α_β at p (variances: covariant, contravariant, covariant).
  Tensor at(const ChartPoint& p) const;
  void components_at(std::span<const double> slots, Tensor& out) const;

  /// K_λ^α_μ = K_μ^α_λ at every lattice point (linear connections only).
  bool is_symmetric(const ProbeBox& box, int per_axis = 3, double tol = 1e-12) const;

  /// Identity of the shared component storage; copies compare equal.
  const void* identity() const { return data_.get(); }
  /// Shared ownership of that storage, so an identity stays unique while held.
  std::shared_ptr<const void> handle() const { return data_; }

 private:
  struct Data {
    Kind kind;
    int n;
    std::vector<ScalarField> c;
    std::vector<int> nonzero;  // indices of components that are not structurally zero
    bool tilde;
  };
  explicit TangentConnectionField(std::shared_ptr<const Data> d) : data_(std::move(d)) {}
  static TangentConnectionField make(Kind kind, int n, std::vector<ScalarField> c);

  std::shared_ptr<const Data> data_;
};

/// Soldering deformation σ built from s and h^i_λ on Q:
///   σ^0_λ = 0,  σ^i_k = h^i_k + (s−1) h^i_k q̇^0,
///   σ^i_0 = −s h^i_k q̇^k − h^i_0 q̇^0 + h^i_0.
struct SolderingForm {
  ScalarField s;
  std::vector<ScalarField> h;  // h[(i-1)*(n+1) + λ]

  const ScalarField& H(int i, int lambda, int n) const {
    return h[static_cast<std::size_t>((i - 1) * (n + 1) + lambda)];
  }
};

class CurvatureField {
 public:
  explicit CurvatureField(TangentConnectionField K);

  int dimension() const { return K_.dimension(); }
  const TangentConnectionField& connection() const { return K_; }

  /// R_λμ^α_β at p (variances: covariant, covariant, contravariant, covariant).
  Tensor at(const ChartPoint& p) const;
  void components_at(std::span<const double> slots, Tensor& out) const;

  double max_abs(const ProbeBox& box, int per_axis = 5) const;

 private:
  const ScalarField& dK(int lambda, int mu, int alpha, int beta) const;

  TangentConnectionField K_;
  std::vector<ScalarField> dK_;  // ∂_λ K_μ^α_β
};

/// Symmetric tilde linear connection of a quadratic dynamic equation:
/// K_0^i_0 = f^i, K_0^i_j = K_j^i_0 = ½ b^i_j, K_j^i_k = a^i_jk.
TangentConnectionField linear_from_quadratic(const QuadraticCoefficients& c);

/// ξ^i = (K^i_λ − Γ^i K^0_λ) q̇^λ on the slice q̇^0 = 1, q̇^i = q_t^i.
DynamicEquationField xi_from_connection(const TangentConnectionField& K, const ReferenceFrameField& frame);

/// Linear connection K_μ^i_λ = γ^i_μλ of an affine dynamic connection.
TangentConnectionField connection_from_gamma(const DynamicConnectionField& gamma);

TangentConnectionField apply_soldering(const TangentConnectionField& K, const SolderingForm& sigma);

struct TransformResult {
  TangentConnectionField connection;
  double frame_discrepancy = 0.0;
  std::vector<std::string> warnings;
};

/// Components of K in the chart q' = F(t, q):
///   K'^α_λ = (∂_γ q'^α K^γ_μ + ∂_μ q̇'^α) ∂q^μ/∂q'^λ.
TransformResult transform_connection(const TangentConnectionField& K, const FrameMap& frame,
                                     const ProbeBox& box);

CurvatureField curvature(const TangentConnectionField& K);

bool is_flat(const TangentConnectionField& K, const ProbeBox& box, double tol = 1e-8, int per_axis = 5);

struct FreeMotion {
  DynamicEquationField xi;
  DynamicConnectionField gamma;
};

/// Inertial-force equation in the chart q = F(t, q̄) where q̄_tt = 0.
FreeMotion free_motion_equation(const FrameMap& frame);

}  // namespace geoflow
