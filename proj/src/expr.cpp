#include "geoflow/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "geoflow/error.hpp"

namespace geoflow {

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;
using Kind = Expr::Node::Kind;

NodePtr make_constant(double v) {
  auto node = std::make_shared<Expr::Node>();
  node->kind = Kind::Constant;
  node->value = v;
  return node;
}

NodePtr make_variable(int s) {
  auto node = std::make_shared<Expr::Node>();
  node->kind = Kind::Variable;
  node->slot = s;
  return node;
}

NodePtr make_unary(UnaryOp op, NodePtr a) {
  auto node = std::make_shared<Expr::Node>();
  node->kind = Kind::Unary;
  node->uop = op;
  node->a = std::move(a);
  return node;
}

NodePtr make_binary(BinaryOp op, NodePtr a, NodePtr b) {
  auto node = std::make_shared<Expr::Node>();
  node->kind = Kind::Binary;
  node->bop = op;
  node->a = std::move(a);
  node->b = std::move(b);
  return node;
}

const char* unary_name(UnaryOp op) {
  switch (op) {
    case UnaryOp::Neg: return "-";
    case UnaryOp::Sin: return "sin";
    case UnaryOp::Cos: return "cos";
    case UnaryOp::Exp: return "exp";
    case UnaryOp::Log: return "log";
    case UnaryOp::Sqrt: return "sqrt";
    case UnaryOp::Abs: return "abs";
  }
  return "?";
}

[[noreturn]] void domain_error(const std::string& what, std::span<const double> slots) {
  throw EvaluationError(what, std::vector<double>(slots.begin(), slots.end()));
}

double eval_node(const Expr::Node& node, std::span<const double> slots) {
  switch (node.kind) {
    case Kind::Constant:
      return node.value;
    case Kind::Variable:
      return slots[static_cast<std::size_t>(node.slot)];
    case Kind::Unary: {
      const double x = eval_node(*node.a, slots);
      switch (node.uop) {
        case UnaryOp::Neg: return -x;
        case UnaryOp::Sin: return std::sin(x);
        case UnaryOp::Cos: return std::cos(x);
        case UnaryOp::Exp: return std::exp(x);
        case UnaryOp::Log:
          if (!(x > 0.0)) domain_error("log of non-positive argument", slots);
          return std::log(x);
        case UnaryOp::Sqrt:
          if (x < 0.0) domain_error("sqrt of negative argument", slots);
          return std::sqrt(x);
        case UnaryOp::Abs: return std::abs(x);
      }
      break;
    }
    case Kind::Binary: {
      const double x = eval_node(*node.a, slots);
      const double y = eval_node(*node.b, slots);
      switch (node.bop) {
        case BinaryOp::Add: return x + y;
        case BinaryOp::Sub: return x - y;
        case BinaryOp::Mul: return x * y;
        case BinaryOp::Div:
          if (y == 0.0) domain_error("division by zero", slots);
          return x / y;
        case BinaryOp::Pow: {
          const double r = std::pow(x, y);
          if (!std::isfinite(r) && std::isfinite(x) && std::isfinite(y))
            domain_error("power outside its domain", slots);
          return r;
        }
      }
      break;
    }
  }
  return 0.0;
}

bool node_depends_on(const Expr::Node& node, int s) {
  switch (node.kind) {
    case Kind::Constant: return false;
    case Kind::Variable: return node.slot == s;
    case Kind::Unary: return node_depends_on(*node.a, s);
    case Kind::Binary: return node_depends_on(*node.a, s) || node_depends_on(*node.b, s);
  }
  return false;
}

bool nodes_equal(const Expr::Node& x, const Expr::Node& y) {
  if (&x == &y) return true;
  if (x.kind != y.kind) return false;
  switch (x.kind) {
    case Kind::Constant: return x.value == y.value;
    case Kind::Variable: return x.slot == y.slot;
    case Kind::Unary: return x.uop == y.uop && nodes_equal(*x.a, *y.a);
    case Kind::Binary:
      return x.bop == y.bop && nodes_equal(*x.a, *y.a) && nodes_equal(*x.b, *y.b);
  }
  return false;
}

// Printing precedence: sums 1, products 2, negation 3, powers 4, atoms 5.
int precedence(const Expr::Node& node) {
  switch (node.kind) {
    case Kind::Constant: return node.value < 0.0 ? 0 : 5;
    case Kind::Variable: return 5;
    case Kind::Unary: return node.uop == UnaryOp::Neg ? 3 : 5;
    case Kind::Binary:
      switch (node.bop) {
        case BinaryOp::Add:
        case BinaryOp::Sub: return 1;
        case BinaryOp::Mul:
        case BinaryOp::Div: return 2;
        case BinaryOp::Pow: return 4;
      }
  }
  return 0;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // Shortest representation that still round-trips.
  for (int digits = 1; digits < 17; ++digits) {
    char shorter[32];
    std::snprintf(shorter, sizeof shorter, "%.*g", digits, v);
    if (std::strtod(shorter, nullptr) == v) return shorter;
  }
  return buf;
}

void print_node(const Expr::Node& node, int n, std::ostream& os);

void print_child(const Expr::Node& child, int n, int min_prec, std::ostream& os) {
  if (precedence(child) < min_prec) {
    os << '(';
    print_node(child, n, os);
    os << ')';
  } else {
    print_node(child, n, os);
  }
}

void print_node(const Expr::Node& node, int n, std::ostream& os) {
  switch (node.kind) {
    case Kind::Constant:
      os << format_number(node.value);
      return;
    case Kind::Variable:
      os << slot_name(n, node.slot);
      return;
    case Kind::Unary:
      if (node.uop == UnaryOp::Neg) {
        os << '-';
        print_child(*node.a, n, 3, os);
      } else {
        os << unary_name(node.uop) << '(';
        print_node(*node.a, n, os);
        os << ')';
      }
      return;
    case Kind::Binary:
      switch (node.bop) {
        case BinaryOp::Add:
          print_child(*node.a, n, 1, os);
          os << " + ";
          print_child(*node.b, n, 2, os);
          return;
        case BinaryOp::Sub:
          print_child(*node.a, n, 1, os);
          os << " - ";
          print_child(*node.b, n, 2, os);
          return;
        case BinaryOp::Mul:
          print_child(*node.a, n, 2, os);
          os << '*';
          print_child(*node.b, n, 3, os);
          return;
        case BinaryOp::Div:
          print_child(*node.a, n, 2, os);
          os << '/';
          print_child(*node.b, n, 3, os);
          return;
        case BinaryOp::Pow:
          print_child(*node.a, n, 5, os);
          os << '^';
          print_child(*node.b, n, 3, os);
          return;
      }
  }
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  Parser(std::string_view text, int n, const SymbolTable& symbols)
      : text_(text), n_(n), symbols_(symbols) {}

  NodePtr parse() {
    skip_ws();
    if (pos_ >= text_.size()) fail("empty expression", {"expression"});
    NodePtr e = parse_expr();
    skip_ws();
    if (pos_ < text_.size()) fail("unexpected trailing input", {"'+'", "'-'", "'*'", "'/'", "'^'", "end of input"});
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what, std::vector<std::string> expected) const {
    std::ostringstream msg;
    msg << "syntax error at offset " << pos_ << ": " << what;
    if (!expected.empty()) {
      msg << " (expected ";
      for (std::size_t i = 0; i < expected.size(); ++i) msg << (i ? ", " : "") << expected[i];
      msg << ')';
    }
    throw ParseError(msg.str(), pos_, std::move(expected));
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = make_binary(BinaryOp::Add, lhs, parse_term());
      } else if (accept('-')) {
        lhs = make_binary(BinaryOp::Sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_term() {
    if (accept('-')) return make_unary(UnaryOp::Neg, parse_term());
    NodePtr lhs = parse_factor();
    for (;;) {
      if (accept('*')) {
        lhs = make_binary(BinaryOp::Mul, lhs, parse_factor());
      } else if (accept('/')) {
        lhs = make_binary(BinaryOp::Div, lhs, parse_factor());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_factor() {
    if (accept('-')) return make_unary(UnaryOp::Neg, parse_factor());
    NodePtr base = parse_primary();
    if (accept('^')) return make_binary(BinaryOp::Pow, base, parse_factor());
    return base;
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input", {"number", "identifier", "'('", "'-'"});
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_expr();
      if (!accept(')')) fail("unbalanced parenthesis", {"')'"});
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_name();
    fail(std::string("unexpected character '") + c + "'", {"number", "identifier", "'('", "'-'"});
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
      ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
      if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
        pos_ = look;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    double value = 0.0;
    const char* first = text_.data() + start;
    const char* last = text_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
      pos_ = start;
      fail("malformed number", {"number"});
    }
    return make_constant(value);
  }

  NodePtr parse_name() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);

    static const std::map<std::string_view, UnaryOp> functions = {
        {"sin", UnaryOp::Sin},   {"cos", UnaryOp::Cos},   {"exp", UnaryOp::Exp},
        {"log", UnaryOp::Log},   {"sqrt", UnaryOp::Sqrt}, {"abs", UnaryOp::Abs}};
    if (auto it = functions.find(name); it != functions.end()) {
      if (!accept('(')) fail("function call needs parentheses", {"'('"});
      NodePtr arg = parse_expr();
      if (!accept(')')) fail("unbalanced parenthesis", {"')'"});
      return make_unary(it->second, arg);
    }
    if (name == "t") return make_variable(slot::time());

    auto index_after = [&](std::size_t prefix) -> std::optional<int> {
      if (name.size() <= prefix) return std::nullopt;
      int index = 0;
      const char* first = name.data() + prefix;
      const char* last = name.data() + name.size();
      auto [ptr, ec] = std::from_chars(first, last, index);
      if (ec != std::errc() || ptr != last) return std::nullopt;
      return index;
    };
    if (name.rfind("dq", 0) == 0) {
      if (auto index = index_after(2)) {
        if (*index < 0 || *index > n_) {
          pos_ = start;
          fail("velocity variable '" + std::string(name) + "' out of range for n=" + std::to_string(n_), {});
        }
        return make_variable(slot::qdot(n_, *index));
      }
    } else if (name.rfind('q', 0) == 0) {
      if (auto index = index_after(1)) {
        if (*index < 1 || *index > n_) {
          pos_ = start;
          fail("position variable '" + std::string(name) + "' out of range for n=" + std::to_string(n_), {});
        }
        return make_variable(slot::q(*index));
      }
    }
    if (auto it = symbols_.find(name); it != symbols_.end()) return make_constant(it->second);
    pos_ = start;
    fail("unknown identifier '" + std::string(name) + "'", {});
  }

  std::string_view text_;
  int n_;
  const SymbolTable& symbols_;
  std::size_t pos_ = 0;
};

}  // namespace

// ---------------------------------------------------------------------------

Expr Expr::constant(int n, double value) { return Expr(n, make_constant(value)); }
Expr Expr::variable(int n, int slot_index) { return Expr(n, make_variable(slot_index)); }
Expr Expr::unary(UnaryOp op, const Expr& a) { return Expr(a.n_, make_unary(op, a.root_)); }
Expr Expr::binary(BinaryOp op, const Expr& a, const Expr& b) {
  return Expr(a.n_, make_binary(op, a.root_, b.root_));
}

double Expr::eval(std::span<const double> slots) const { return eval_node(*root_, slots); }

std::string Expr::str() const {
  std::ostringstream os;
  print_node(*root_, n_, os);
  return os.str();
}

std::optional<double> Expr::constant_value() const {
  if (root_->kind == Kind::Constant) return root_->value;
  if (root_->kind == Kind::Unary && root_->uop == UnaryOp::Neg && root_->a->kind == Kind::Constant)
    return -root_->a->value;
  return std::nullopt;
}

bool Expr::is_zero() const { return root_->kind == Kind::Constant && root_->value == 0.0; }

bool Expr::depends_on(int slot_index) const { return node_depends_on(*root_, slot_index); }

bool structurally_equal(const Expr& a, const Expr& b) { return nodes_equal(*a.root_, *b.root_); }

std::string slot_name(int n, int s) {
  if (s == slot::time()) return "t";
  if (s <= n) return "q" + std::to_string(s);
  return "dq" + std::to_string(s - n - 1);
}

Expr Expr::from_node(int n, std::shared_ptr<const Node> root) { return Expr(n, std::move(root)); }

Expr parse(std::string_view text, int n, const SymbolTable& symbols) {
  Parser parser(text, n, symbols);
  return Expr::from_node(n, parser.parse());
}

// ---------------------------------------------------------------------------
// Simplifying constructors

namespace {

bool is_neg(const Expr& e) { return e.node().kind == Kind::Unary && e.node().uop == UnaryOp::Neg; }

/// c * x with a literal leading factor.
std::optional<std::pair<double, Expr>> scaled(const Expr& e) {
  const Expr::Node& node = e.node();
  if (node.kind != Kind::Binary || node.bop != BinaryOp::Mul || node.a->kind != Kind::Constant) return std::nullopt;
  return std::make_pair(node.a->value, Expr::from_node(e.dimension(), node.b));
}

}  // namespace

Expr operator+(const Expr& a, const Expr& b) {
  const auto ca = a.constant_value();
  const auto cb = b.constant_value();
  if (ca && cb) return Expr::constant(a.dimension(), *ca + *cb);
  if (ca && *ca == 0.0) return b;
  if (cb && *cb == 0.0) return a;
  return Expr::binary(BinaryOp::Add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
  const auto ca = a.constant_value();
  const auto cb = b.constant_value();
  if (ca && cb) return Expr::constant(a.dimension(), *ca - *cb);
  if (cb && *cb == 0.0) return a;
  if (ca && *ca == 0.0) return -b;
  return Expr::binary(BinaryOp::Sub, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
  const auto ca = a.constant_value();
  const auto cb = b.constant_value();
  if (ca && cb) return Expr::constant(a.dimension(), *ca * *cb);
  if ((ca && *ca == 0.0) || (cb && *cb == 0.0)) return Expr::constant(a.dimension(), 0.0);
  if (ca && *ca == 1.0) return b;
  if (cb && *cb == 1.0) return a;
  if (ca && *ca == -1.0) return -b;
  if (cb && *cb == -1.0) return -a;
  const int n = a.dimension();
  if (is_neg(a)) return -(Expr::from_node(n, a.node().a) * b);
  if (is_neg(b)) return -(a * Expr::from_node(n, b.node().a));
  if (cb) return b * a;  // constants lead
  if (ca) {
    if (auto inner = scaled(b)) return Expr::constant(n, *ca * inner->first) * inner->second;
  }
  return Expr::binary(BinaryOp::Mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
  const auto ca = a.constant_value();
  const auto cb = b.constant_value();
  if (ca && cb && *cb != 0.0) return Expr::constant(a.dimension(), *ca / *cb);
  if (ca && *ca == 0.0) return a;
  if (cb && *cb == 1.0) return a;
  if (cb && *cb != 0.0) {
    if (auto inner = scaled(a)) return Expr::constant(a.dimension(), inner->first / *cb) * inner->second;
  }
  return Expr::binary(BinaryOp::Div, a, b);
}

Expr operator-(const Expr& a) {
  if (auto c = a.constant_value()) return Expr::constant(a.dimension(), -*c);
  if (is_neg(a)) return Expr::from_node(a.dimension(), a.node().a);
  if (auto inner = scaled(a)) return Expr::constant(a.dimension(), -inner->first) * inner->second;
  return Expr::unary(UnaryOp::Neg, a);
}

Expr pow(const Expr& a, const Expr& b) {
  const auto cb = b.constant_value();
  if (cb && *cb == 0.0) return Expr::constant(a.dimension(), 1.0);
  if (cb && *cb == 1.0) return a;
  if (auto ca = a.constant_value(); ca && cb) return Expr::constant(a.dimension(), std::pow(*ca, *cb));
  return Expr::binary(BinaryOp::Pow, a, b);
}

Expr apply(UnaryOp op, const Expr& a) {
  if (op == UnaryOp::Neg) return -a;
  if (auto c = a.constant_value()) {
    switch (op) {
      case UnaryOp::Sin: return Expr::constant(a.dimension(), std::sin(*c));
      case UnaryOp::Cos: return Expr::constant(a.dimension(), std::cos(*c));
      case UnaryOp::Exp: return Expr::constant(a.dimension(), std::exp(*c));
      case UnaryOp::Abs: return Expr::constant(a.dimension(), std::abs(*c));
      default: break;  // log/sqrt keep their domain checks at evaluation time
    }
  }
  return Expr::unary(op, a);
}

// ---------------------------------------------------------------------------

Expr differentiate(const Expr& e, int s) {
  const int n = e.dimension();
  const Expr::Node& node = e.node();
  auto sub = [n](const NodePtr& p) { return Expr::from_node(n, p); };
  const Expr zero = Expr::constant(n, 0.0);
  const Expr one = Expr::constant(n, 1.0);
  const Expr two = Expr::constant(n, 2.0);

  switch (node.kind) {
    case Kind::Constant: return zero;
    case Kind::Variable: return node.slot == s ? one : zero;
    case Kind::Unary: {
      const Expr a = sub(node.a);
      const Expr da = differentiate(a, s);
      if (da.is_zero()) return zero;
      switch (node.uop) {
        case UnaryOp::Neg: return -da;
        case UnaryOp::Sin: return apply(UnaryOp::Cos, a) * da;
        case UnaryOp::Cos: return -(apply(UnaryOp::Sin, a) * da);
        case UnaryOp::Exp: return e * da;
        case UnaryOp::Log: return da / a;
        case UnaryOp::Sqrt: return da / (two * e);
        case UnaryOp::Abs: return da * a / e;
      }
      break;
    }
    case Kind::Binary: {
      const Expr a = sub(node.a);
      const Expr b = sub(node.b);
      const Expr da = differentiate(a, s);
      const Expr db = differentiate(b, s);
      switch (node.bop) {
        case BinaryOp::Add: return da + db;
        case BinaryOp::Sub: return da - db;
        case BinaryOp::Mul: return da * b + a * db;
        case BinaryOp::Div:
          if (db.is_zero()) return da / b;
          return da / b - a * db / pow(b, two);
        case BinaryOp::Pow: {
          if (db.is_zero()) {
            if (da.is_zero()) return zero;
            return b * pow(a, b - one) * da;
          }
          // d(a^b) = a^b (b' log a + b a'/a)
          Expr inner = db * apply(UnaryOp::Log, a);
          if (!da.is_zero()) inner = inner + b * da / a;
          return e * inner;
        }
      }
      break;
    }
  }
  return zero;
}

namespace {

Expr substitute_impl(const Expr::Node& node, int n, std::span<const Expr> repl, int new_n) {
  auto rec = [&](const NodePtr& p) { return substitute_impl(*p, n, repl, new_n); };
  switch (node.kind) {
    case Kind::Constant: return Expr::constant(new_n, node.value);
    case Kind::Variable: return repl[static_cast<std::size_t>(node.slot)];
    case Kind::Unary: return apply(node.uop, rec(node.a));
    case Kind::Binary: {
      const Expr a = rec(node.a);
      const Expr b = rec(node.b);
      switch (node.bop) {
        case BinaryOp::Add: return a + b;
        case BinaryOp::Sub: return a - b;
        case BinaryOp::Mul: return a * b;
        case BinaryOp::Div: return a / b;
        case BinaryOp::Pow: return pow(a, b);
      }
    }
  }
  return Expr::constant(new_n, 0.0);
}

}  // namespace

Expr substitute(const Expr& e, std::span<const Expr> replacements, int new_n) {
  return substitute_impl(e.node(), e.dimension(), replacements, new_n);
}

}  // namespace geoflow
