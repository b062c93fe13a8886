#pragma once

// Scalar expression language over (t, q1..qn, dq0, dq1..dqn).
//
// Grammar (whitespace-insensitive):
//   expr    := term (('+' | '-') term)*
//   term    := '-' term | chain
//   chain   := factor (('*' | '/') factor)*
//   factor  := '-' factor | power
//   power   := primary ('^' factor)?          right-associative
//   primary := number | name | name '(' expr ')' | '(' expr ')'
//
// Names are t, qN (1<=N<=n), dqN (0<=N<=n), the functions
// sin cos exp log sqrt abs, and constants from the symbol table, which are
// folded into literals at parse time.

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace geoflow {

/// Slot layout shared by every scalar field of dimension n.
namespace slot {
constexpr int time() { return 0; }
constexpr int q(int i) { return i; }                       // position q^i, i in 1..n
constexpr int qdot(int n, int lambda) { return n + 1 + lambda; }  // velocity q̇^λ, λ in 0..n
constexpr int count(int n) { return 2 * n + 2; }
/// Base coordinate q^λ (λ = 0 is time).
constexpr int base(int lambda) { return lambda; }
}  // namespace slot

enum class UnaryOp { Neg, Sin, Cos, Exp, Log, Sqrt, Abs };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };

using SymbolTable = std::map<std::string, double, std::less<>>;

class Expr {
 public:
  struct Node;

  static Expr constant(int n, double value);
  static Expr variable(int n, int slot_index);
  static Expr unary(UnaryOp op, const Expr& a);
  static Expr binary(BinaryOp op, const Expr& a, const Expr& b);
  static Expr from_node(int n, std::shared_ptr<const Node> root);

  int dimension() const { return n_; }

  double eval(std::span<const double> slots) const;
  std::string str() const;

  std::optional<double> constant_value() const;
  bool is_zero() const;
  bool depends_on(int slot_index) const;

  const Node& node() const { return *root_; }
  const std::shared_ptr<const Node>& root() const { return root_; }

  friend bool structurally_equal(const Expr& a, const Expr& b);

 private:
  Expr(int n, std::shared_ptr<const Node> root) : n_(n), root_(std::move(root)) {}

  int n_ = 1;
  std::shared_ptr<const Node> root_;
};

struct Expr::Node {
  enum class Kind { Constant, Variable, Unary, Binary } kind;
  double value = 0.0;
  int slot = 0;
  UnaryOp uop = UnaryOp::Neg;
  BinaryOp bop = BinaryOp::Add;
  std::shared_ptr<const Node> a;
  std::shared_ptr<const Node> b;
};

Expr parse(std::string_view text, int n, const SymbolTable& symbols = {});

/// Exact symbolic derivative with light simplification.
Expr differentiate(const Expr& e, int slot_index);

/// Replaces every variable slot s of `e` by `replacements[s]`; the result
/// lives in dimension `new_n` (all replacements must share it).
Expr substitute(const Expr& e, std::span<const Expr> replacements, int new_n);

std::string slot_name(int n, int slot_index);

// Simplifying constructors: fold constants and drop 0/1 identities.
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& a, const Expr& b);
Expr apply(UnaryOp op, const Expr& a);

}  // namespace geoflow
