#pragma once

// Quadratic Lagrangians L = ½ m_ij q_t^i q_t^j + k_i q_t^i + f, their
// fibre metrics, Christoffel symbols and the induced linear connection.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "geoflow/chart.hpp"
#include "geoflow/dynamics.hpp"
#include "geoflow/scalar_field.hpp"
#include "geoflow/tangent_connection.hpp"
#include "geoflow/tensor.hpp"

namespace geoflow {

struct LagrangianCoefficients {
  int n = 1;
  std::vector<ScalarField> m;  // n x n, symmetric
  std::vector<ScalarField> k;  // n
  ScalarField f;

  ScalarField& M(int i, int j) { return m[static_cast<std::size_t>((i - 1) * n + (j - 1))]; }
  const ScalarField& M(int i, int j) const { return m[static_cast<std::size_t>((i - 1) * n + (j - 1))]; }
  ScalarField& K(int i) { return k[static_cast<std::size_t>(i - 1)]; }
  const ScalarField& K(int i) const { return k[static_cast<std::size_t>(i - 1)]; }

  /// m = identity, k = 0, f = 0.
  static LagrangianCoefficients free(int n);

  /// Throws MetricError unless m is symmetric and positive-definite on the lattice.
  void validate(const ProbeBox& box, int per_axis = 3) const;
};

/// Symmetric (n+1)x(n+1) metric field on the fibres of TQ.
class TangentMetric {
 public:
  TangentMetric(int n, std::vector<ScalarField> g, bool degenerate_allowed, std::string frame = {});

  int dimension() const { return n_; }
  bool degenerate_allowed() const { return degenerate_; }
  /// Chart the metric was built in; empty when it is chart-independent.
  const std::string& frame() const { return frame_; }

  const ScalarField& operator()(int alpha, int mu) const {
    return g_[static_cast<std::size_t>(alpha * (n_ + 1) + mu)];
  }
  Eigen::MatrixXd at(std::span<const double> slots) const;
  Eigen::MatrixXd at(const ChartPoint& p) const { return at(base_slots(p)); }

 private:
  int n_;
  std::vector<ScalarField> g_;
  bool degenerate_;
  std::string frame_;
};

/// g_00 = 2f, g_0i = k_i, g_ij = m_ij.
TangentMetric metric_from_lagrangian(const LagrangianCoefficients& L);

/// ḡ_00 = 1, ḡ_0i = 0, ḡ_ij = m_ij, tagged with `frame`.
TangentMetric extend_mass_metric(const std::vector<ScalarField>& m, int n, std::string frame = "working");

/// {λμν} = −½(∂_λ g_μν + ∂_ν g_μλ − ∂_μ g_λν), all indices lower.
Tensor christoffel(const TangentMetric& g, const ChartPoint& p);

/// K̃_λ^0_ν = 0, K̃_λ^i_ν = (m⁻¹)^ik {λkν}. Throws MetricError when m is
/// singular on the probe lattice.
TangentConnectionField lagrangian_connection(const LagrangianCoefficients& L,
                                             const ProbeBox& probes);
TangentConnectionField lagrangian_connection(const LagrangianCoefficients& L);

/// Lagrange equations solved pointwise: m q_tt = {λ i μ} q̇^λ q̇^μ with q̇^0 = 1.
class LagrangeEquation {
 public:
  explicit LagrangeEquation(const LagrangianCoefficients& L);
  int dimension() const { return n_; }
  /// Spatial accelerations at a slot vector with dq0 = 1.
  void acceleration(std::span<const double> slots, std::span<double> out) const;

 private:
  int n_;
  TangentMetric g_;
  std::vector<ScalarField> dg_;  // ∂_λ g_μν at index (λ(n+1)+μ)(n+1)+ν
};

/// max over the lattice and (i, j) of
///   |∂_0 m_ij + q_t^k ∂_k m_ij + m_ik γ^k_j + m_jk γ^k_i|
/// with γ = gamma_from_xi(ξ). Zero certifies a Newtonian system.
double compatibility_residual(const DynamicEquationField& xi, const std::vector<ScalarField>& m,
                              const ProbeBox& box, int per_axis = 3);
/// Same quantity at explicit jet points.
double compatibility_residual(const DynamicEquationField& xi, const std::vector<ScalarField>& m,
                              std::span<const TangentVector> probes);

}  // namespace geoflow
