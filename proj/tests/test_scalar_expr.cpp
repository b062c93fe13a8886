#include <doctest.h>

#include <cmath>
#include <numbers>

#include "corpus.hpp"
#include "geoflow/error.hpp"
#include "geoflow/expr.hpp"
#include "support.hpp"

using namespace geoflow;

namespace {

std::vector<double> slots(int n, std::initializer_list<std::pair<int, double>> values) {
  std::vector<double> s(static_cast<std::size_t>(slot::count(n)), 0.0);
  s[static_cast<std::size_t>(slot::qdot(n, 0))] = 1.0;
  for (auto [k, v] : values) s[static_cast<std::size_t>(k)] = v;
  return s;
}

const SymbolTable kOne{{"k", 1.0}};

}  // namespace

TEST_CASE("leading minus binds looser than multiplication") {
  const Expr e = parse("-k*q1", 1, kOne);
  const auto& root = e.node();
  REQUIRE(root.kind == Expr::Node::Kind::Unary);
  CHECK(root.uop == UnaryOp::Neg);
  REQUIRE(root.a->kind == Expr::Node::Kind::Binary);
  CHECK(root.a->bop == BinaryOp::Mul);
  CHECK(root.a->a->kind == Expr::Node::Kind::Constant);
  CHECK(root.a->a->value == 1.0);
  CHECK(root.a->b->kind == Expr::Node::Kind::Variable);
  CHECK(root.a->b->slot == slot::q(1));
}

TEST_CASE("power of a velocity") {
  const Expr e = parse("dq1^2", 1);
  CHECK(e.node().bop == BinaryOp::Pow);
  CHECK(e.node().a->slot == slot::qdot(1, 1));
  CHECK(e.eval(slots(1, {{slot::qdot(1, 1), 3.0}})) == 9.0);
}

TEST_CASE("function call with whitespace") {
  const Expr e = parse("sin(q2)/ (1+t)", 2);
  CHECK(e.eval(slots(2, {{0, 0.0}, {2, std::numbers::pi / 2}})) == doctest::Approx(1.0));
}

TEST_CASE("power is right-associative and binds tighter than unary minus") {
  CHECK(parse("2^3^2", 1).eval(slots(1, {})) == 512.0);
  CHECK(parse("-2^2", 1).eval(slots(1, {})) == -4.0);
  CHECK(parse("2^-1", 1).eval(slots(1, {})) == 0.5);
  CHECK(parse("1-2-3", 1).eval(slots(1, {})) == -4.0);
  CHECK(parse("8/4/2", 1).eval(slots(1, {})) == 1.0);
}

TEST_CASE("basic evaluation") {
  CHECK(parse("5", 1).eval(slots(1, {})) == 5.0);
  CHECK(parse("q1*q1", 1).eval(slots(1, {{1, -2.0}})) == 4.0);
  CHECK(parse("exp(0)+cos(0)", 1).eval(slots(1, {})) == 2.0);
}

TEST_CASE("domain errors carry the binding") {
  const auto s = slots(1, {{1, -1.0}});
  for (const char* text : {"log(q1)", "sqrt(q1)", "1/(q1+1)", "log(0)"}) {
    try {
      parse(text, 1).eval(s);
      FAIL("expected an evaluation error for " << text);
    } catch (const EvaluationError& e) {
      CHECK(e.binding() == s);
    }
  }
}

TEST_CASE("syntax errors are positioned") {
  struct Case {
    const char* text;
    std::size_t offset;
  };
  for (const Case c : {Case{"q1 +", 4}, Case{"(q1", 3}, Case{"q1 ** 2", 4}, Case{"sin q1", 4}, Case{"q1 q2", 3},
                       Case{"", 0}, Case{"3 + $", 4}}) {
    try {
      parse(c.text, 2);
      FAIL("expected a parse error for '" << c.text << "'");
    } catch (const ParseError& e) {
      CHECK_MESSAGE(e.offset() == c.offset, c.text);
      CHECK(!e.expected().empty());
    }
  }
}

TEST_CASE("unknown identifiers and out-of-range variables are rejected") {
  CHECK_THROWS_AS(parse("foo*q1", 1), ParseError);
  CHECK_THROWS_AS(parse("q3", 2), ParseError);
  CHECK_THROWS_AS(parse("dq3", 2), ParseError);
  CHECK_THROWS_AS(parse("q0", 2), ParseError);
  CHECK_NOTHROW(parse("dq0*q2", 2));
}

TEST_CASE("constants fold at parse time") {
  const Expr e = parse("omega*t", 1, {{"omega", 2.5}});
  CHECK(e.eval(slots(1, {{0, 2.0}})) == 5.0);
  CHECK(e.node().a->kind == Expr::Node::Kind::Constant);
}

TEST_CASE("derivative examples") {
  const Expr d = differentiate(parse("q1^2", 1), slot::q(1));
  CHECK(d.str() == "2*q1");
  CHECK(d.eval(slots(1, {{1, 3.0}})) == 6.0);
  CHECK(differentiate(parse("-k*q1", 1, kOne), slot::qdot(1, 1)).is_zero());
}

TEST_CASE("light simplification") {
  const Expr x = Expr::variable(1, 1);
  const Expr zero = Expr::constant(1, 0.0), one = Expr::constant(1, 1.0);
  CHECK((zero * x).is_zero());
  CHECK(structurally_equal(x + zero, x));
  CHECK(structurally_equal(one * x, x));
}

TEST_CASE("derivatives of the corpus match finite differences") {
  testing::Random rng(1);
  for (const auto& text : testing::expression_corpus()) {
    const Expr e = parse(text, 2, kOne);
    for (int s = 0; s < slot::count(2); ++s) {
      if (s == slot::qdot(2, 0)) continue;
      const Expr d = differentiate(e, s);
      for (int k = 0; k < 20; ++k) {
        auto p = rng.jet(2, 0.9);
        const double fd = fd_partial(ScalarField(e), p, s);
        CHECK_MESSAGE(std::abs(d.eval(p) - fd) < 1e-6 * std::max(1.0, std::abs(fd)), text << " slot " << s);
      }
    }
  }
}

TEST_CASE("print then parse round-trips") {
  testing::Random rng(2);
  for (const auto& text : testing::expression_corpus()) {
    const Expr e = parse(text, 2, kOne);
    const Expr back = parse(e.str(), 2);
    for (int k = 0; k < 100; ++k) {
      const auto p = rng.jet(2, 0.9);
      const double x = e.eval(p), y = back.eval(p);
      CHECK_MESSAGE(std::abs(x - y) <= 1e-12 * std::max(1.0, std::abs(x)), text << " printed as " << e.str());
    }
  }
}

TEST_CASE("substitution composes expressions") {
  const Expr e = parse("q1^2 + t", 1);
  std::vector<Expr> r{Expr::variable(1, 0), parse("sin(q1)", 1), Expr::variable(1, 2), Expr::variable(1, 3)};
  const Expr c = substitute(e, r, 1);
  CHECK(c.eval(slots(1, {{0, 0.5}, {1, 0.3}})) == doctest::Approx(std::sin(0.3) * std::sin(0.3) + 0.5));
}

TEST_CASE("scalar fields mix expressions and callables") {
  const ScalarField a = testing::F("q1^2", 1);
  const ScalarField b(1, [](std::span<const double> s) { return std::sin(s[1]); });
  const ScalarField c = a * b;
  CHECK(!c.is_expression());
  const auto p = slots(1, {{1, 0.4}});
  CHECK(c(p) == doctest::Approx(0.16 * std::sin(0.4)));
  CHECK(c.partial(1)(p) == doctest::Approx(0.8 * std::sin(0.4) + 0.16 * std::cos(0.4)).epsilon(1e-7));
}
