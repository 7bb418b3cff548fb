#include "msv/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

namespace msv::expr {

ParseError::ParseError(Kind kind, std::size_t offset, const std::string& what)
    : std::runtime_error("offset " + std::to_string(offset) + ": " + what), kind_(kind), offset_(offset) {}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

NodePtr node(NodeKind kind, double value = 0.0, int axis = 0, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
  return std::make_shared<const Node>(Node{kind, value, axis, std::move(lhs), std::move(rhs)});
}

bool is_const(const NodePtr& n, double c) { return n->kind == NodeKind::Const && n->value == c; }
bool is_const(const NodePtr& n) { return n->kind == NodeKind::Const; }

bool is_integer(double p) { return std::floor(p) == p; }

// Conservative lower bound of the node over R^d.
double lower_bound(const NodePtr& n) {
  switch (n->kind) {
    case NodeKind::Const:
      return n->value;
    case NodeKind::Norm:
    case NodeKind::Log1pNorm:
      return 0.0;
    case NodeKind::ExpNorm:
      return 1.0;
    case NodeKind::Add:
      return lower_bound(n->lhs) + lower_bound(n->rhs);
    case NodeKind::Mul: {
      const double a = lower_bound(n->lhs);
      const double b = lower_bound(n->rhs);
      return (a >= 0.0 && b >= 0.0) ? a * b : -kInf;
    }
    case NodeKind::Pow: {
      const double b = lower_bound(n->lhs);
      if (n->value == 0.0) return 1.0;
      if (b >= 0.0) return std::pow(b, n->value);
      if (is_integer(n->value) && std::fmod(n->value, 2.0) == 0.0) return 0.0;
      return -kInf;
    }
    default:
      return -kInf;
  }
}

bool scan_origin_singular(const NodePtr& n) {
  if (!n) return false;
  switch (n->kind) {
    case NodeKind::Norm:
    case NodeKind::Log1pNorm:
    case NodeKind::ExpNorm:
    case NodeKind::RadialUnit:
      return true;
    case NodeKind::Pow:
      if (n->lhs->kind == NodeKind::Norm) return n->value > 0.0 && n->value < 2.0;
      return scan_origin_singular(n->lhs);
    default:
      return scan_origin_singular(n->lhs) || scan_origin_singular(n->rhs);
  }
}

double eval_node(const Node& n, std::span<const double> x, double r) {
  switch (n.kind) {
    case NodeKind::Const:
      return n.value;
    case NodeKind::Coord:
      return x[n.axis];
    case NodeKind::Norm:
      return r;
    case NodeKind::Add:
      return eval_node(*n.lhs, x, r) + eval_node(*n.rhs, x, r);
    case NodeKind::Sub:
      return eval_node(*n.lhs, x, r) - eval_node(*n.rhs, x, r);
    case NodeKind::Mul:
      return eval_node(*n.lhs, x, r) * eval_node(*n.rhs, x, r);
    case NodeKind::Neg:
      return -eval_node(*n.lhs, x, r);
    case NodeKind::Pow: {
      const double b = eval_node(*n.lhs, x, r);
      if (n.value == 2.0) return b * b;
      return std::pow(b, n.value);
    }
    case NodeKind::Log1pNorm:
      return std::log1p(r);
    case NodeKind::ExpNorm:
      return std::exp(r);
    case NodeKind::RadialUnit:
      if (r == 0.0) return 0.0;
      return x[n.axis] * std::pow(r, n.value);
    case NodeKind::Recip:
      return 1.0 / eval_node(*n.lhs, x, r);
  }
  return 0.0;
}

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, end);
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  Parser(std::string_view text, int dim) : text_(text), dim_(dim) {}

  NodePtr parse_all() {
    skip_ws();
    if (pos_ >= text_.size()) fail(ParseError::Kind::Syntax, pos_, "empty expression");
    NodePtr e = parse_expr();
    skip_ws();
    if (pos_ < text_.size())
      fail(ParseError::Kind::Syntax, pos_, std::string("unexpected character '") + text_[pos_] + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(ParseError::Kind kind, std::size_t at, const std::string& msg) const {
    throw ParseError(kind, at, msg);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  // Matches `lit` exactly at the current position or reports the first
  // offending offset.
  void expect_literal(std::string_view lit) {
    for (std::size_t i = 0; i < lit.size(); ++i) {
      if (pos_ + i >= text_.size())
        fail(ParseError::Kind::Syntax, pos_ + i, "unexpected end of input, expected '" + std::string(lit) + "'");
      if (text_[pos_ + i] != lit[i])
        fail(ParseError::Kind::Syntax, pos_ + i, "expected '" + std::string(lit) + "'");
    }
    pos_ += lit.size();
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    while (true) {
      if (peek('+')) {
        ++pos_;
        lhs = make_add(lhs, parse_term());
      } else if (peek('-')) {
        ++pos_;
        lhs = make_sub(lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_factor();
    while (peek('*')) {
      ++pos_;
      lhs = make_mul(lhs, parse_factor());
    }
    return lhs;
  }

  NodePtr parse_factor() {
    if (peek('-')) {
      ++pos_;
      return make_neg(parse_factor());
    }
    NodePtr base = parse_atom();
    if (!peek('^')) return base;
    ++pos_;
    skip_ws();
    const std::size_t exp_at = pos_;
    bool negative = false;
    if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
      negative = text_[pos_] == '-';
      ++pos_;
    }
    double p = parse_number();
    if (negative && p != 0.0) fail(ParseError::Kind::NegativeExponent, exp_at, "exponent must be nonnegative");
    check_power(base, p, exp_at);
    return make_pow(base, p);
  }

  void check_power(const NodePtr& base, double p, std::size_t at) const {
    if (base->kind == NodeKind::Norm) {
      if (p > 0.0 && p < 1.0) fail(ParseError::Kind::Domain, at, "exponent of |x| must be 0 or >= 1");
      return;
    }
    if (p == 0.0 || p == 1.0) return;
    const double lb = lower_bound(base);
    if (!is_integer(p) && lb < 0.0)
      fail(ParseError::Kind::Domain, at, "non-integer exponent needs a base that is nonnegative everywhere");
    if (p < 1.0 && lb <= 0.0)
      fail(ParseError::Kind::Domain, at, "exponent below 1 needs a base bounded away from zero");
  }

  double parse_number() {
    skip_ws();
    const std::size_t start = pos_;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), v);
    if (ec != std::errc() || ptr == text_.data() + pos_) fail(ParseError::Kind::Syntax, start, "expected a number");
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    return v;
  }

  NodePtr parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail(ParseError::Kind::Syntax, pos_, "unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = parse_expr();
      skip_ws();
      if (pos_ >= text_.size() || text_[pos_] != ')') fail(ParseError::Kind::Syntax, pos_, "expected ')'");
      ++pos_;
      return e;
    }
    if (c == '|') {
      expect_literal("|x|");
      return make_norm();
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return make_const(parse_number());
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_word();
    fail(ParseError::Kind::Syntax, pos_, std::string("unexpected character '") + c + "'");
  }

  NodePtr parse_word() {
    const std::size_t start = pos_;
    std::size_t end = pos_;
    while (end < text_.size() && (std::isalpha(static_cast<unsigned char>(text_[end])) || text_[end] == '_')) ++end;
    std::string_view word = text_.substr(start, end - start);
    if (word == "x") {
      pos_ = end;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        std::size_t idx = 0;
        auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), idx);
        (void)ec;
        pos_ = static_cast<std::size_t>(ptr - text_.data());
        if (idx >= static_cast<std::size_t>(dim_))
          fail(ParseError::Kind::CoordinateOutOfRange, start,
               "coordinate x" + std::to_string(idx) + " out of range for dim " + std::to_string(dim_));
        return make_coord(static_cast<int>(idx));
      }
      if (dim_ != 1) fail(ParseError::Kind::Syntax, start, "bare 'x' is only allowed when dim == 1; use x0, x1, ...");
      return make_coord(0);
    }
    if (text_.substr(start, 5) == "log1p") {
      pos_ = start + 5;
      expect_literal("|x|");
      return node(NodeKind::Log1pNorm);
    }
    if (word == "exp") {
      pos_ = end;
      expect_literal("|x|");
      return node(NodeKind::ExpNorm);
    }
    while (end < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_')) ++end;
    fail(ParseError::Kind::UnknownSymbol, start, "unknown symbol '" + std::string(text_.substr(start, end - start)) + "'");
  }

  std::string_view text_;
  int dim_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Differentiation

NodePtr radial_unit(int axis, double q) { return node(NodeKind::RadialUnit, q, axis); }

NodePtr derivative(const NodePtr& n, int i) {
  switch (n->kind) {
    case NodeKind::Const:
      return make_const(0.0);
    case NodeKind::Coord:
      return make_const(n->axis == i ? 1.0 : 0.0);
    case NodeKind::Norm:
      return radial_unit(i, -1.0);
    case NodeKind::Add:
      return make_add(derivative(n->lhs, i), derivative(n->rhs, i));
    case NodeKind::Sub:
      return make_sub(derivative(n->lhs, i), derivative(n->rhs, i));
    case NodeKind::Mul:
      return make_add(make_mul(derivative(n->lhs, i), n->rhs), make_mul(n->lhs, derivative(n->rhs, i)));
    case NodeKind::Neg:
      return make_neg(derivative(n->lhs, i));
    case NodeKind::Pow: {
      const double p = n->value;
      if (p == 0.0) return make_const(0.0);
      if (n->lhs->kind == NodeKind::Norm) return make_mul(make_const(p), radial_unit(i, p - 2.0));
      if (p == 1.0) return derivative(n->lhs, i);
      return make_mul(make_mul(make_const(p), make_pow(n->lhs, p - 1.0)), derivative(n->lhs, i));
    }
    case NodeKind::Log1pNorm:
      return make_mul(radial_unit(i, -1.0), node(NodeKind::Recip, 0.0, 0, make_add(make_const(1.0), make_norm())));
    case NodeKind::ExpNorm:
      return make_mul(n, radial_unit(i, -1.0));
    case NodeKind::Recip:
      return make_neg(make_mul(derivative(n->lhs, i), make_pow(n, 2.0)));
    case NodeKind::RadialUnit:
      throw std::logic_error("second derivatives of radial terms are not supported");
  }
  return make_const(0.0);
}

// ---------------------------------------------------------------------------
// Printing

int precedence(const Node& n) {
  switch (n.kind) {
    case NodeKind::Add:
    case NodeKind::Sub:
      return 1;
    case NodeKind::Mul:
    case NodeKind::RadialUnit:
      return 2;
    case NodeKind::Neg:
      return 3;
    case NodeKind::Const:
      return n.value < 0.0 ? 3 : 5;
    case NodeKind::Pow:
      return 4;
    default:
      return 5;
  }
}

void print_node(const Node& n, int parent, std::string& out) {
  const int prec = precedence(n);
  const bool paren = prec < parent;
  if (paren) out += '(';
  switch (n.kind) {
    case NodeKind::Const:
      out += format_number(n.value);
      break;
    case NodeKind::Coord:
      out += "x" + std::to_string(n.axis);
      break;
    case NodeKind::Norm:
      out += "|x|";
      break;
    case NodeKind::Add:
      print_node(*n.lhs, 1, out);
      out += " + ";
      print_node(*n.rhs, 2, out);
      break;
    case NodeKind::Sub:
      print_node(*n.lhs, 1, out);
      out += " - ";
      print_node(*n.rhs, 2, out);
      break;
    case NodeKind::Mul:
      print_node(*n.lhs, 2, out);
      out += "*";
      print_node(*n.rhs, 3, out);
      break;
    case NodeKind::Neg:
      out += "-";
      print_node(*n.lhs, 3, out);
      break;
    case NodeKind::Pow:
      print_node(*n.lhs, 5, out);
      out += "^" + format_number(n.value);
      break;
    case NodeKind::Log1pNorm:
      out += "log1p|x|";
      break;
    case NodeKind::ExpNorm:
      out += "exp|x|";
      break;
    case NodeKind::RadialUnit:
      out += "x" + std::to_string(n.axis) + "*|x|^" + format_number(n.value);
      break;
    case NodeKind::Recip:
      out += "1/";
      print_node(*n.lhs, 5, out);
      break;
  }
  if (paren) out += ')';
}

const char* kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::Const: return "Const";
    case NodeKind::Coord: return "Coord";
    case NodeKind::Norm: return "Norm";
    case NodeKind::Add: return "Add";
    case NodeKind::Sub: return "Sub";
    case NodeKind::Mul: return "Mul";
    case NodeKind::Neg: return "Neg";
    case NodeKind::Pow: return "Pow";
    case NodeKind::Log1pNorm: return "Log1pNorm";
    case NodeKind::ExpNorm: return "ExpNorm";
    case NodeKind::RadialUnit: return "RadialUnit";
    case NodeKind::Recip: return "Recip";
  }
  return "?";
}

void dump_node(const Node& n, int depth, std::ostringstream& os) {
  os << std::string(2 * depth, ' ') << kind_name(n.kind);
  if (n.kind == NodeKind::Const || n.kind == NodeKind::Pow) os << ' ' << format_number(n.value);
  if (n.kind == NodeKind::Coord) os << ' ' << n.axis;
  if (n.kind == NodeKind::RadialUnit) os << " axis=" << n.axis << " q=" << format_number(n.value);
  os << '\n';
  if (n.lhs) dump_node(*n.lhs, depth + 1, os);
  if (n.rhs) dump_node(*n.rhs, depth + 1, os);
}

}  // namespace

// ---------------------------------------------------------------------------

NodePtr make_const(double c) { return node(NodeKind::Const, c); }
NodePtr make_coord(int axis) { return node(NodeKind::Coord, 0.0, axis); }
NodePtr make_norm() { return node(NodeKind::Norm); }

NodePtr make_add(NodePtr a, NodePtr b) {
  if (is_const(a) && is_const(b)) return make_const(a->value + b->value);
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  return node(NodeKind::Add, 0.0, 0, std::move(a), std::move(b));
}

NodePtr make_sub(NodePtr a, NodePtr b) {
  if (is_const(a) && is_const(b)) return make_const(a->value - b->value);
  if (is_const(b, 0.0)) return a;
  if (is_const(a, 0.0)) return make_neg(std::move(b));
  return node(NodeKind::Sub, 0.0, 0, std::move(a), std::move(b));
}

NodePtr make_mul(NodePtr a, NodePtr b) {
  if (is_const(a) && is_const(b)) return make_const(a->value * b->value);
  if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  return node(NodeKind::Mul, 0.0, 0, std::move(a), std::move(b));
}

NodePtr make_neg(NodePtr a) {
  if (is_const(a)) return make_const(-a->value);
  if (a->kind == NodeKind::Neg) return a->lhs;
  return node(NodeKind::Neg, 0.0, 0, std::move(a));
}

NodePtr make_pow(NodePtr base, double exponent) {
  if (exponent == 0.0) return make_const(1.0);
  if (exponent == 1.0) return base;
  if (is_const(base)) return make_const(std::pow(base->value, exponent));
  return node(NodeKind::Pow, exponent, 0, std::move(base));
}

PotentialExpr::PotentialExpr(NodePtr root, int dim)
    : root_(std::move(root)), dim_(dim), origin_singular_(scan_origin_singular(root_)) {}

PotentialExpr PotentialExpr::constant(double c, int dim) { return PotentialExpr(make_const(c), dim); }

bool PotentialExpr::is_constant() const noexcept { return root_ && root_->kind == NodeKind::Const; }

double PotentialExpr::eval(std::span<const double> x) const {
  double r2 = 0.0;
  for (double xi : x) r2 += xi * xi;
  return eval_node(*root_, x, std::sqrt(r2));
}

PotentialExpr parse(std::string_view text, int dim) {
  if (dim < 1) throw std::invalid_argument("expression dimension must be >= 1");
  Parser p(text, dim);
  return PotentialExpr(p.parse_all(), dim);
}

std::vector<PotentialExpr> grad(const PotentialExpr& e) {
  std::vector<PotentialExpr> g;
  g.reserve(static_cast<std::size_t>(e.dim()));
  for (int i = 0; i < e.dim(); ++i) g.emplace_back(derivative(e.root(), i), e.dim());
  return g;
}

std::string print(const PotentialExpr& e) {
  std::string out;
  print_node(*e.root(), 0, out);
  return out;
}

std::string dump_tree(const PotentialExpr& e) {
  std::ostringstream os;
  dump_node(*e.root(), 0, os);
  return os.str();
}

}  // namespace msv::expr
