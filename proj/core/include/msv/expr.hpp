#pragma once

// Scalar field expressions over R^d: the closed node set used for the
// entries of potentials and diffusion matrices.
//
// Grammar (whitespace ignored):
//   expr   := term (('+'|'-') term)*
//   term   := factor ('*' factor)*
//   factor := '-' factor | atom ('^' number)?
//   atom   := number | 'x' index | '|x|' | 'log1p|x|' | 'exp|x|' | '(' expr ')'
//
// A bare 'x' is accepted as 'x0' when dim == 1.

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace msv::expr {

enum class NodeKind {
  Const,
  Coord,
  Norm,
  Add,
  Sub,
  Mul,
  Neg,
  Pow,
  Log1pNorm,
  ExpNorm,
  // Produced by differentiation only; never by the parser.
  RadialUnit,  // x_axis * |x|^value, defined as 0 at the origin
  Recip,       // 1 / lhs, lhs bounded away from zero
};

struct Node {
  NodeKind kind;
  double value = 0.0;  // Const value, Pow exponent, RadialUnit exponent
  int axis = 0;        // Coord / RadialUnit axis
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

using NodePtr = std::shared_ptr<const Node>;

class ParseError : public std::runtime_error {
 public:
  enum class Kind { Syntax, UnknownSymbol, NegativeExponent, CoordinateOutOfRange, Domain };

  ParseError(Kind kind, std::size_t offset, const std::string& what);

  Kind kind() const noexcept { return kind_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

/// Immutable expression; cheap to copy (shared tree).
class PotentialExpr {
 public:
  PotentialExpr() = default;
  PotentialExpr(NodePtr root, int dim);

  static PotentialExpr constant(double c, int dim);

  const NodePtr& root() const noexcept { return root_; }
  int dim() const noexcept { return dim_; }

  /// True when the gradient is discontinuous at x = 0 (|x|^p with p < 2,
  /// log1p|x|, exp|x|). The gradient is defined as zero there.
  bool origin_singular_gradient() const noexcept { return origin_singular_; }

  /// True when the expression is a literal constant (after folding).
  bool is_constant() const noexcept;

  double eval(std::span<const double> x) const;

 private:
  NodePtr root_;
  int dim_ = 0;
  bool origin_singular_ = false;
};

PotentialExpr parse(std::string_view text, int dim);

/// Component-wise analytic gradient (length dim).
std::vector<PotentialExpr> grad(const PotentialExpr& e);

/// Normal form in the input grammar; parse(print(e)) evaluates identically.
std::string print(const PotentialExpr& e);

/// Indented tree dump used by `msv parse-check`.
std::string dump_tree(const PotentialExpr& e);

// Builders with trivial constant folding.
NodePtr make_const(double c);
NodePtr make_coord(int axis);
NodePtr make_norm();
NodePtr make_add(NodePtr a, NodePtr b);
NodePtr make_sub(NodePtr a, NodePtr b);
NodePtr make_mul(NodePtr a, NodePtr b);
NodePtr make_neg(NodePtr a);
NodePtr make_pow(NodePtr base, double exponent);

}  // namespace msv::expr
