#pragma once

// Second-order dynamic equations q^i_tt = ξ^i(t, q, q_t) and the dynamic
// connections γ^i_λ on the affine jet bundle they correspond to.
//
// Spatial indices i, j, k run over 1..n; spacetime indices λ, μ over 0..n.

#include <optional>
#include <span>
#include <vector>

#include "geoflow/chart.hpp"
#include "geoflow/scalar_field.hpp"

namespace geoflow {

/// Coefficients of ξ^i = a^i_jk q_t^j q_t^k + b^i_j q_t^j + f^i, all
/// functions of (t, q) only.
struct QuadraticCoefficients {
  int n = 1;
  std::vector<ScalarField> a;  // n^3, symmetric in (j, k)
  std::vector<ScalarField> b;  // n^2
  std::vector<ScalarField> f;  // n

  static QuadraticCoefficients zero(int n);

  ScalarField& A(int i, int j, int k) { return a[idx3(i, j, k)]; }
  const ScalarField& A(int i, int j, int k) const { return a[idx3(i, j, k)]; }
  ScalarField& B(int i, int j) { return b[static_cast<std::size_t>((i - 1) * n + (j - 1))]; }
  const ScalarField& B(int i, int j) const { return b[static_cast<std::size_t>((i - 1) * n + (j - 1))]; }
  ScalarField& F(int i) { return f[static_cast<std::size_t>(i - 1)]; }
  const ScalarField& F(int i) const { return f[static_cast<std::size_t>(i - 1)]; }

 private:
  std::size_t idx3(int i, int j, int k) const {
    return static_cast<std::size_t>(((i - 1) * n + (j - 1)) * n + (k - 1));
  }
};

class DynamicEquationField {
 public:
  DynamicEquationField(std::vector<ScalarField> xi,
                       std::optional<QuadraticCoefficients> quadratic = std::nullopt,
                       bool conservative = false);

  /// Builds ξ from a, b, f; rejects a that is not symmetric in (j, k).
  static DynamicEquationField quadratic(QuadraticCoefficients c);

  int dimension() const { return n_; }
  const ScalarField& xi(int i) const { return xi_[static_cast<std::size_t>(i - 1)]; }
  const std::vector<ScalarField>& components() const { return xi_; }
  const std::optional<QuadraticCoefficients>& quadratic_form() const { return quadratic_; }
  bool conservative() const { return conservative_; }

  /// Accelerations ξ^i at a slot vector (dq0 is expected to be 1).
  std::vector<double> acceleration(std::span<const double> slots) const;

  /// Checks the closed quadratic form against ξ at lattice points (1e-12).
  double quadratic_discrepancy(const ProbeBox& box, int per_axis = 3) const;

 private:
  int n_;
  std::vector<ScalarField> xi_;
  std::optional<QuadraticCoefficients> quadratic_;
  bool conservative_;
};

/// Coefficients of an affine dynamic connection,
/// γ^i_λ = γ^i_λ0 + γ^i_λj q_t^j, with γ^i_λμ functions of (t, q).
struct AffineCoefficients {
  int n = 1;
  std::vector<ScalarField> c;  // n * (n+1)^2

  static AffineCoefficients zero(int n);
  ScalarField& operator()(int i, int lambda, int mu) { return c[idx(i, lambda, mu)]; }
  const ScalarField& operator()(int i, int lambda, int mu) const { return c[idx(i, lambda, mu)]; }

 private:
  std::size_t idx(int i, int lambda, int mu) const {
    return static_cast<std::size_t>(((i - 1) * (n + 1) + lambda) * (n + 1) + mu);
  }
};

class DynamicConnectionField {
 public:
  /// `gamma` holds γ^i_λ row by row: index (i-1)*(n+1) + λ.
  DynamicConnectionField(int n, std::vector<ScalarField> gamma,
                         std::optional<AffineCoefficients> affine = std::nullopt);
  static DynamicConnectionField affine(AffineCoefficients c);

  int dimension() const { return n_; }
  const ScalarField& gamma(int i, int lambda) const {
    return gamma_[static_cast<std::size_t>((i - 1) * (n_ + 1) + lambda)];
  }
  const std::optional<AffineCoefficients>& affine_form() const { return affine_; }

 private:
  int n_;
  std::vector<ScalarField> gamma_;
  std::optional<AffineCoefficients> affine_;
};

/// A connection Γ on Q → R, i.e. an observer velocity field Γ^i(t, q).
class ReferenceFrameField {
 public:
  explicit ReferenceFrameField(std::vector<ScalarField> gamma);
  static ReferenceFrameField rest(int n);

  int dimension() const { return static_cast<int>(gamma_.size()); }
  const ScalarField& operator()(int i) const { return gamma_[static_cast<std::size_t>(i - 1)]; }

 private:
  std::vector<ScalarField> gamma_;
};

/// γ^i_j = ½ ∂ξ^i/∂q_t^j,  γ^i_0 = ξ^i − ½ q_t^j ∂ξ^i/∂q_t^j.
DynamicConnectionField gamma_from_xi(const DynamicEquationField& xi);

/// ξ^i = γ^i_0 + q_t^j γ^i_j.
DynamicEquationField xi_from_gamma(const DynamicConnectionField& gamma);

/// A dynamic connection is symmetric when it is reproduced by
/// gamma_from_xi(xi_from_gamma(γ)), i.e. γ^k_i = ∂ᵗ_i γ^k_0 + q_t^j ∂ᵗ_i γ^k_j
/// (which implies ∂ᵗ_j γ^k_i = ∂ᵗ_i γ^k_j). For affine connections this is
/// γ^i_λμ = γ^i_μλ.
bool is_symmetric(const DynamicConnectionField& gamma, std::span<const TangentVector> probes,
                  double tol = 1e-9);
/// Same test over a per_axis^(2n+1) lattice.
bool is_symmetric(const DynamicConnectionField& gamma, const ProbeBox& box, int per_axis = 5,
                  double tol = 1e-9);

/// D^Γ: q_t^i − Γ^i at a jet point.
std::vector<double> covariant_differential(const ReferenceFrameField& frame, const TangentVector& jet);

/// Reads an autonomous second-order equation Ξ(q, q̇) on the typical fibre as
/// a conservative dynamic equation on R × M. Rejects time-dependent input.
DynamicEquationField lift_conservative(std::vector<ScalarField> Xi);

}  // namespace geoflow
