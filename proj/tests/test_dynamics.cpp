#include <doctest.h>

#include <cmath>

#include "geoflow/dynamics.hpp"
#include "geoflow/error.hpp"
#include "support.hpp"

using namespace geoflow;
using testing::F;

namespace {

double max_diff(const DynamicEquationField& a, const DynamicEquationField& b, testing::Random& rng, int points = 200) {
  double worst = 0.0;
  const int n = a.dimension();
  for (int k = 0; k < points; ++k) {
    const auto s = rng.jet(n);
    for (int i = 1; i <= n; ++i) worst = std::max(worst, std::abs(a.xi(i)(s) - b.xi(i)(s)));
  }
  return worst;
}

TangentVector jet1(double t, double q, double qt) {
  const std::vector<double> Q{q}, V{qt};
  return TangentVector::jet(t, Q, V);
}

}  // namespace

TEST_CASE("gamma_from_xi: oscillator") {
  const DynamicEquationField xi({F("-k*q1", 1, {{"k", 1.0}})});
  const DynamicConnectionField g = gamma_from_xi(xi);
  const auto s = jet1(0.2, 0.7, -0.3).slots();
  CHECK(g.gamma(1, 1)(s) == 0.0);
  CHECK(g.gamma(1, 0)(s) == doctest::Approx(-0.7));
}

TEST_CASE("gamma_from_xi: velocity squared") {
  const DynamicConnectionField g = gamma_from_xi(DynamicEquationField({F("dq1^2", 1)}));
  const auto s = jet1(0.0, 0.5, 1.3).slots();
  CHECK(g.gamma(1, 1)(s) == doctest::Approx(1.3));
  CHECK(g.gamma(1, 0)(s) == doctest::Approx(0.0));
}

TEST_CASE("gamma_from_xi: zero") {
  const DynamicConnectionField g = gamma_from_xi(DynamicEquationField({F("0", 2), F("0", 2)}));
  for (int i = 1; i <= 2; ++i)
    for (int l = 0; l <= 2; ++l) CHECK(g.gamma(i, l).is_zero());
}

TEST_CASE("gamma_from_xi populates the affine form for quadratic input") {
  testing::Random rng(3);
  const QuadraticCoefficients c = rng.quadratic(2);
  const DynamicConnectionField g = gamma_from_xi(DynamicEquationField::quadratic(c));
  REQUIRE(g.affine_form());
  const auto& a = *g.affine_form();
  const auto s = rng.jet(2);
  for (int i = 1; i <= 2; ++i) {
    CHECK(a(i, 0, 0)(s) == doctest::Approx(c.F(i)(s)));
    for (int j = 1; j <= 2; ++j) {
      CHECK(a(i, j, 0)(s) == doctest::Approx(0.5 * c.B(i, j)(s)));
      CHECK(a(i, 0, j)(s) == doctest::Approx(0.5 * c.B(i, j)(s)));
      for (int k = 1; k <= 2; ++k) CHECK(a(i, j, k)(s) == doctest::Approx(c.A(i, j, k)(s)));
    }
  }
}

TEST_CASE("xi_from_gamma examples") {
  const auto s = jet1(0.1, 0.4, 2.0).slots();
  {
    const DynamicConnectionField g(1, {F("-q1", 1), F("0", 1)});
    CHECK(xi_from_gamma(g).xi(1)(s) == doctest::Approx(-0.4));
  }
  {
    const DynamicConnectionField g(1, {F("0", 1), F("0", 1)});
    CHECK(xi_from_gamma(g).xi(1)(s) == 0.0);
  }
  {
    const DynamicConnectionField g(1, {F("0", 1), F("dq1", 1)});
    CHECK(xi_from_gamma(g).xi(1)(s) == doctest::Approx(4.0));
  }
}

TEST_CASE("round trip on random quadratic and non-quadratic systems") {
  testing::Random rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = rng.integer(1, 3);
    const DynamicEquationField q = DynamicEquationField::quadratic(rng.quadratic(n));
    CHECK(max_diff(xi_from_gamma(gamma_from_xi(q)), q, rng) < 1e-10);
    const DynamicEquationField g = rng.non_quadratic(n);
    CHECK(max_diff(xi_from_gamma(gamma_from_xi(g)), g, rng) < 1e-10);
  }
}

TEST_CASE("round trip through a callable-backed system uses finite differences") {
  const DynamicEquationField xi({ScalarField(1, [](std::span<const double> s) {
    return -std::sin(s[1]) - 0.2 * s[3] * s[3] * s[3];
  })});
  testing::Random rng(5);
  CHECK(max_diff(xi_from_gamma(gamma_from_xi(xi)), xi, rng) < 1e-7);
}

TEST_CASE("symmetry test") {
  testing::Random rng(6);
  const ProbeBox box = ProbeBox::unit(2);
  CHECK(is_symmetric(gamma_from_xi(DynamicEquationField::quadratic(rng.quadratic(2))), box, 3));
  CHECK(is_symmetric(gamma_from_xi(rng.non_quadratic(2)), box, 3));

  AffineCoefficients asym = AffineCoefficients::zero(1);
  asym(1, 0, 1) = F("1", 1);
  CHECK_FALSE(is_symmetric(DynamicConnectionField::affine(asym), ProbeBox::unit(1)));

  CHECK(is_symmetric(DynamicConnectionField::affine(AffineCoefficients::zero(2)), box, 3));
}

TEST_CASE("symmetric dynamic connections are reproduced by the round trip") {
  testing::Random rng(7);
  const DynamicConnectionField g = gamma_from_xi(rng.non_quadratic(2));
  const DynamicConnectionField back = gamma_from_xi(xi_from_gamma(g));
  for (int k = 0; k < 50; ++k) {
    const auto s = rng.jet(2);
    for (int i = 1; i <= 2; ++i)
      for (int l = 0; l <= 2; ++l) CHECK(std::abs(back.gamma(i, l)(s) - g.gamma(i, l)(s)) < 1e-10);
  }
}

TEST_CASE("an asymmetric connection round-trips to a different connection with the same equation") {
  // γ¹_0 = q1_t (from γ¹_01 = 1), γ¹_1 = 0: ξ = q1_t, but γ_ξ has γ¹_1 = ½.
  AffineCoefficients asym = AffineCoefficients::zero(1);
  asym(1, 0, 1) = F("1", 1);
  const DynamicConnectionField g = DynamicConnectionField::affine(asym);
  const DynamicEquationField xi = xi_from_gamma(g);
  const DynamicConnectionField back = gamma_from_xi(xi);
  const auto s = jet1(0.0, 0.3, 0.8).slots();
  CHECK(back.gamma(1, 1)(s) == doctest::Approx(0.5));
  CHECK(g.gamma(1, 1)(s) == doctest::Approx(0.0));
  CHECK(xi_from_gamma(back).xi(1)(s) == doctest::Approx(xi.xi(1)(s)));
}

TEST_CASE("quadratic form agrees with the general evaluator") {
  testing::Random rng(8);
  const DynamicEquationField xi = DynamicEquationField::quadratic(rng.quadratic(3));
  CHECK(xi.quadratic_discrepancy(ProbeBox::unit(3)) < 1e-12);
}

TEST_CASE("quadratic input with asymmetric a is rejected") {
  QuadraticCoefficients c = QuadraticCoefficients::zero(2);
  c.A(1, 1, 2) = F("1", 2);
  CHECK_THROWS_AS(DynamicEquationField::quadratic(c), ContractError);
}

TEST_CASE("covariant differential") {
  const std::vector<double> q{0.0, 2.0}, v{1.5, -0.5};
  const TangentVector jet = TangentVector::jet(0.0, q, v);
  const auto rest = covariant_differential(ReferenceFrameField::rest(2), jet);
  CHECK(rest[0] == 1.5);
  CHECK(rest[1] == -0.5);

  const auto comoving = covariant_differential(ReferenceFrameField({F("3", 1)}), jet1(0.0, 0.0, 3.0));
  CHECK(comoving[0] == 0.0);

  // Rotating observer Γ¹ = ω q², Γ² = −ω q¹ with ω = 0.5 at q = (0, 2).
  const ReferenceFrameField rot({F("0.5*q2", 2), F("-0.5*q1", 2)});
  const auto d = covariant_differential(rot, jet);
  CHECK(d[0] == doctest::Approx(1.5 - 1.0));
  CHECK(d[1] == doctest::Approx(-0.5));
}

TEST_CASE("reference frames reject velocity dependence") {
  CHECK_THROWS_AS(ReferenceFrameField({F("dq1", 1)}), ContractError);
}

TEST_CASE("conservative lift") {
  const auto s = jet1(3.0, 0.6, 0.2).slots();
  const DynamicEquationField osc = lift_conservative({F("-q1", 1)});
  CHECK(osc.conservative());
  CHECK(osc.xi(1)(s) == doctest::Approx(-0.6));
  CHECK(lift_conservative({F("0", 1)}).xi(1)(s) == 0.0);
  CHECK(lift_conservative({F("-sin(q1)", 1)}).xi(1)(s) == doctest::Approx(-std::sin(0.6)));
  CHECK_THROWS_AS(lift_conservative({F("-q1*t", 1)}), ContractError);
  CHECK_THROWS_AS(lift_conservative({ScalarField(1, [](std::span<const double> x) { return x[0]; })}),
                  ContractError);
}
