#include <doctest.h>

#include <cmath>
#include <numbers>

#include "geoflow/chart.hpp"
#include "geoflow/error.hpp"
#include "geoflow/tensor.hpp"
#include "support.hpp"

using namespace geoflow;
using testing::F;

TEST_CASE("fd_partial of a linear field is exact") {
  const ScalarField f = F("q1", 2);
  const ChartPoint p(0.3, std::vector<double>{1.7, -2.0});
  CHECK(std::abs(fd_partial(f, p, 1) - 1.0) < 1e-10);
  CHECK(std::abs(fd_partial(f, p, 2)) < 1e-12);
}

TEST_CASE("fd_partial of a square matches the analytic derivative") {
  const ScalarField f = F("q1^2", 1);
  CHECK(std::abs(fd_partial(f, ChartPoint(0.0, std::vector<double>{3.0}), 1) - 6.0) < 1e-7);
}

TEST_CASE("fd_partial of a constant is zero along every axis") {
  const ScalarField f = ScalarField::constant(2, 4.5);
  const ChartPoint p(1.0, std::vector<double>{2.0, 3.0});
  for (int l = 0; l <= 2; ++l) CHECK(fd_partial(f, p, l) == 0.0);
}

TEST_CASE("fd_partial converges at second order") {
  const ScalarField f = F("sin(q1)*exp(t)", 1);
  const ChartPoint p(0.2, std::vector<double>{0.7});
  const double exact = std::cos(0.7) * std::exp(0.2);
  std::vector<double> logh, loge;
  for (double h : {1e-2, 5e-3, 2.5e-3, 1.25e-3}) {
    logh.push_back(std::log(h));
    loge.push_back(std::log(std::abs(fd_partial(f, p, 1, h) - exact)));
  }
  // least-squares slope
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < logh.size(); ++i) {
    mx += logh[i];
    my += loge[i];
  }
  mx /= logh.size();
  my /= logh.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < logh.size(); ++i) {
    sxy += (logh[i] - mx) * (loge[i] - my);
    sxx += (logh[i] - mx) * (logh[i] - mx);
  }
  CHECK(std::abs(sxy / sxx - 2.0) < 0.1);
}

TEST_CASE("fd_partial reports non-finite evaluations") {
  const ScalarField f(1, [](std::span<const double> s) { return s[1] > 0 ? 1.0 / 0.0 : 0.0; });
  CHECK_THROWS_AS(fd_partial(f, ChartPoint(0.0, std::vector<double>{1.0}), 1), EvaluationError);
}

TEST_CASE("auto step follows the cube-root rule") {
  const double e = std::cbrt(std::numeric_limits<double>::epsilon());
  CHECK(auto_step(0.5) == doctest::Approx(e));
  CHECK(auto_step(-10.0) == doctest::Approx(10.0 * e));
}

TEST_CASE("chart points reject bad input") {
  CHECK_THROWS_AS(ChartPoint(std::vector<double>{0.0}), ContractError);
  CHECK_THROWS_AS(ChartPoint(std::vector<double>{0.0, std::nan("")}), ContractError);
  CHECK_THROWS_AS(TangentVector(ChartPoint(std::vector<double>{0.0, 1.0}), {1.0}), ContractError);
}

TEST_CASE("push_vector through the identity is the identity") {
  testing::Random rng(11);
  const FrameMap id = FrameMap::identity(3);
  for (int k = 0; k < 20; ++k) {
    std::vector<double> q{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
    std::vector<double> dot{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
    const TangentVector v(ChartPoint(rng.uniform(0, 1), q), dot);
    const TangentVector w = push_vector(id, v);
    for (int l = 0; l <= 3; ++l) {
      CHECK(w.dot()[l] == doctest::Approx(v.dot()[l]).epsilon(1e-14));
      CHECK(w.base()[l] == doctest::Approx(v.base()[l]).epsilon(1e-14));
    }
  }
}

TEST_CASE("push_vector through a boost adds the boost velocity") {
  const std::vector<double> vel{2.0};
  const TangentVector v(ChartPoint(0.5, std::vector<double>{1.0}), {1.0, 3.0});
  const TangentVector w = push_vector(FrameMap::boost(vel), v);
  CHECK(w.dot()[0] == doctest::Approx(1.0));
  CHECK(w.dot()[1] == doctest::Approx(5.0));
  CHECK(w.base()[1] == doctest::Approx(2.0));
}

TEST_CASE("push_vector through a rotation matches finite differences of the forward map") {
  const FrameMap R = FrameMap::rotation(2, 1.0);
  const TangentVector v(ChartPoint(0.0, std::vector<double>{1.0, 0.0}), {1.0, 0.0, 0.0});
  const TangentVector w = push_vector(R, v);
  // At t = 0 with q = (1, 0): q'² = sin(t) q¹ + cos(t) q², so ∂_t q'² = 1.
  CHECK(w.dot()[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(w.dot()[2] == doctest::Approx(1.0));
  const ChartPoint p = v.base();
  for (int i = 1; i <= 2; ++i) {
    double fd = 0.0;
    for (int l = 0; l <= 2; ++l) fd += fd_partial(R.forward()[i - 1], p, l) * v.dot()[l];
    CHECK(w.dot()[i] == doctest::Approx(fd).epsilon(1e-8));
  }
}

TEST_CASE("push_vector rejects a singular frame") {
  const FrameMap squash({F("q1", 2), F("q1", 2)}, {F("q1", 2), F("q2", 2)});
  const TangentVector v(ChartPoint(0.0, std::vector<double>{1.0, 1.0}), {1.0, 0.0, 0.0});
  CHECK_THROWS_AS(push_vector(squash, v), FrameError);
}

TEST_CASE("frame validation detects a wrong inverse and a singular Jacobian") {
  const FrameMap wrong({F("q1 + t", 1)}, {F("q1", 1)});
  CHECK_THROWS_AS(wrong.validate(ProbeBox::unit(1)), FrameError);
  const FrameMap flat({F("q1^3", 1)}, {F("q1", 1)});
  CHECK_THROWS_AS(flat.validate(ProbeBox::unit(1)), FrameError);
  CHECK_NOTHROW(FrameMap::rotation(2, 0.7).validate(ProbeBox::unit(2)));
}

TEST_CASE("frame consistency compares the declared inverse with the inverted Jacobian") {
  CHECK(FrameMap::rotation(2, 1.3).consistency(ProbeBox::unit(2)) < 1e-12);
  const FrameMap sloppy({F("2*q1", 1)}, {F("0.5*q1 + 0.001*q1^2", 1)});
  CHECK(sloppy.consistency(ProbeBox::unit(1)) > 1e-4);
}

TEST_CASE("contract: identity times vector") {
  Tensor id(3, {Variance::Contravariant, Variance::Covariant});
  for (int i = 0; i < 3; ++i) id(i, i) = 1.0;
  const std::vector<double> v{1.0, -2.0, 5.0};
  const Tensor r = contract(id, vector_tensor(v), 1, 0);
  for (int i = 0; i < 3; ++i) CHECK(r(i) == v[static_cast<std::size_t>(i)]);
}

TEST_CASE("contract: diagonal matrix times vector") {
  Tensor d(2, {Variance::Contravariant, Variance::Covariant});
  d(0, 0) = 1.0;
  d(1, 1) = 2.0;
  const Tensor r = contract(d, vector_tensor(std::vector<double>{3.0, 4.0}), 1, 0);
  CHECK(r(0) == 3.0);
  CHECK(r(1) == 8.0);
}

TEST_CASE("contract agrees with a naive loop on random tensors") {
  testing::Random rng(5);
  for (int n = 1; n <= 4; ++n) {
    const int d = n + 1;
    Tensor a(d, {Variance::Covariant, Variance::Contravariant, Variance::Covariant});
    Tensor b(d, {Variance::Contravariant, Variance::Covariant});
    for (auto& x : a.data()) x = rng.uniform(-1, 1);
    for (auto& x : b.data()) x = rng.uniform(-1, 1);
    const Tensor c = contract(a, b, 2, 0);  // c_{λ}^{α}_{ν} = a_λ^α_β b^β_ν
    REQUIRE(c.rank() == 3);
    CHECK(c.variances() == std::vector<Variance>{Variance::Covariant, Variance::Contravariant, Variance::Covariant});
    double worst = 0.0;
    for (int l = 0; l < d; ++l)
      for (int al = 0; al < d; ++al)
        for (int nu = 0; nu < d; ++nu) {
          double s = 0.0;
          for (int be = 0; be < d; ++be) s += a(l, al, be) * b(be, nu);
          worst = std::max(worst, std::abs(s - c(l, al, nu)));
        }
    CHECK(worst < 1e-14);
  }
}

TEST_CASE("contract rejects mismatched variance or dimension") {
  Tensor a(2, {Variance::Covariant});
  Tensor b(2, {Variance::Covariant});
  CHECK_THROWS_AS(contract(a, b, 0, 0), TypeError);
  Tensor c(3, {Variance::Contravariant});
  CHECK_THROWS_AS(contract(a, c, 0, 0), TypeError);
  CHECK_THROWS_AS(a(5), TypeError);
}

TEST_CASE("probe lattice covers the box with dq0 = 1") {
  ProbeBox box = ProbeBox::unit(1);
  int count = 0;
  box.for_each(3, true, [&](std::span<const double> s) {
    ++count;
    CHECK(s[static_cast<std::size_t>(slot::qdot(1, 0))] == 1.0);
  });
  CHECK(count == 27);
}
