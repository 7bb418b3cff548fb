#include "msv/expr.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace {

using namespace msv::expr;

double at(const PotentialExpr& e, std::vector<double> x) { return e.eval(x); }

TEST(ExprParse, SumOfConstantAndQuarticNorm) {
  const auto e = parse("1+|x|^4", 1);
  const auto& r = *e.root();
  ASSERT_EQ(r.kind, NodeKind::Add);
  EXPECT_EQ(r.lhs->kind, NodeKind::Const);
  EXPECT_EQ(r.lhs->value, 1.0);
  ASSERT_EQ(r.rhs->kind, NodeKind::Pow);
  EXPECT_EQ(r.rhs->value, 4.0);
  EXPECT_EQ(r.rhs->lhs->kind, NodeKind::Norm);
}

TEST(ExprParse, NegatedParenthesizedSum) {
  const auto e = parse("-(1+|x|^1.5)", 2);
  const auto& r = *e.root();
  ASSERT_EQ(r.kind, NodeKind::Neg);
  ASSERT_EQ(r.lhs->kind, NodeKind::Add);
  EXPECT_EQ(r.lhs->lhs->value, 1.0);
  EXPECT_EQ(r.lhs->rhs->kind, NodeKind::Pow);
  EXPECT_EQ(r.lhs->rhs->value, 1.5);
}

TEST(ExprParse, ErrorKindsAndOffsets) {
  struct Case {
    const char* text;
    int dim;
    ParseError::Kind kind;
    std::size_t offset;
  };
  const Case cases[] = {
      {"|x^2", 1, ParseError::Kind::Syntax, 2},
      {"1+", 1, ParseError::Kind::Syntax, 2},
      {"y", 1, ParseError::Kind::UnknownSymbol, 0},
      {"|x|^-1", 1, ParseError::Kind::NegativeExponent, 4},
      {"1 + x2", 2, ParseError::Kind::CoordinateOutOfRange, 4},
  };
  for (const auto& c : cases) {
    try {
      parse(c.text, c.dim);
      ADD_FAILURE() << c.text << " parsed";
    } catch (const ParseError& e) {
      EXPECT_EQ(e.kind(), c.kind) << c.text;
      EXPECT_EQ(e.offset(), c.offset) << c.text;
    }
  }
}

TEST(ExprParse, NormPowerBelowOneRejected) { EXPECT_THROW(parse("|x|^0.5", 1), ParseError); }

TEST(ExprEval, Examples) {
  EXPECT_DOUBLE_EQ(at(parse("|x|^2", 2), {3, 4}), 25.0);
  EXPECT_DOUBLE_EQ(at(parse("log1p|x|", 2), {0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(at(parse("1+|x|^4", 1), {1}), 2.0);
  EXPECT_DOUBLE_EQ(at(parse("x", 1), {-2.5}), -2.5);
  EXPECT_DOUBLE_EQ(at(parse("2*x1 - x0", 2), {1, 3}), 5.0);
}

TEST(ExprGrad, Examples) {
  const auto g = grad(parse("1+|x|^2", 3));
  ASSERT_EQ(g.size(), 3u);
  const std::vector<double> x{0.5, -1.0, 2.0};
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(g[i].eval(x), 2 * x[i], 1e-14);

  const std::vector<double> y{0.3, -0.4};
  const auto ge = grad(parse("exp|x|", 2));
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(ge[i].eval(y), std::exp(0.5) * y[i] / 0.5, 1e-12);

  EXPECT_NEAR(grad(parse("1+|x|^4", 1))[0].eval(std::vector<double>{1.0}), 4.0, 1e-14);
}

TEST(ExprGrad, OriginConventionIsFlagged) {
  const auto e = parse("|x|^1.5", 2);
  EXPECT_TRUE(e.origin_singular_gradient());
  for (const auto& g : grad(e)) EXPECT_EQ(g.eval(std::vector<double>{0, 0}), 0.0);
  EXPECT_FALSE(parse("1+|x|^2", 2).origin_singular_gradient());
}

// Random trees over every parser node kind. Powers of non-norm bases use
// integer exponents so evaluation stays real.
class TreeGen {
 public:
  TreeGen(int dim, std::uint64_t seed) : dim_(dim), rng_(seed) {}

  NodePtr gen(int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 4 : 10);
    switch (pick(rng_)) {
      case 0: return make_const(std::uniform_real_distribution<double>(-2, 2)(rng_));
      case 1: return make_coord(std::uniform_int_distribution<int>(0, dim_ - 1)(rng_));
      case 2: return make_pow(make_norm(), std::uniform_real_distribution<double>(1, 3.5)(rng_));
      case 3: return leaf(NodeKind::Log1pNorm);
      case 4: return make_mul(make_const(0.3), leaf(NodeKind::ExpNorm));
      case 5:
      case 6: return make_add(gen(depth - 1), gen(depth - 1));
      case 7: return make_sub(gen(depth - 1), gen(depth - 1));
      case 8: return make_mul(gen(depth - 1), gen(depth - 1));
      case 9: return make_neg(gen(depth - 1));
      default: return make_pow(gen(depth - 1), std::uniform_int_distribution<int>(0, 3)(rng_));
    }
  }

  std::vector<double> point(double scale) {
    std::normal_distribution<double> n(0.0, scale);
    std::vector<double> x(dim_);
    for (auto& v : x) v = n(rng_);
    return x;
  }

 private:
  static NodePtr leaf(NodeKind k) { return std::make_shared<const Node>(Node{k}); }

  int dim_;
  std::mt19937_64 rng_;
};

TEST(ExprProperty, GradientMatchesCentralDifference) {
  const double step = 1e-5;
  for (int dim = 1; dim <= 3; ++dim) {
    TreeGen gen(dim, 100 + dim);
    for (int tree = 0; tree < 60; ++tree) {
      const PotentialExpr e(gen.gen(4), dim);
      const auto g = grad(e);
      for (int s = 0; s < 10; ++s) {
        auto x = gen.point(1.0);
        double r = 0;
        for (double v : x) r += v * v;
        if (std::sqrt(r) < 0.1) continue;
        for (int i = 0; i < dim; ++i) {
          auto xp = x, xm = x;
          xp[i] += step;
          xm[i] -= step;
          const double fd = (e.eval(xp) - e.eval(xm)) / (2 * step);
          const double an = g[i].eval(x);
          const double scale = std::max({1.0, std::abs(an), std::abs(e.eval(x))});
          EXPECT_NEAR(an, fd, 1e-5 * scale) << print(e) << " axis " << i;
        }
      }
    }
  }
}

TEST(ExprProperty, PrintParseRoundTrip) {
  for (int dim = 1; dim <= 3; ++dim) {
    TreeGen gen(dim, 7 * dim);
    for (int tree = 0; tree < 80; ++tree) {
      const PotentialExpr e(gen.gen(5), dim);
      const std::string text = print(e);
      const auto once = parse(text, dim);
      const auto twice = parse(print(once), dim);
      EXPECT_EQ(print(once), print(twice));
      for (int s = 0; s < 100; ++s) {
        const auto x = gen.point(2.0);
        const double a = e.eval(x), b = once.eval(x), c = twice.eval(x);
        const double tol = 1e-12 * std::max(1.0, std::abs(a));
        EXPECT_NEAR(a, b, tol) << text;
        EXPECT_EQ(b, c) << text;
      }
    }
  }
}

TEST(ExprProperty, EvaluationIsFinite) {
  TreeGen gen(2, 99);
  for (int tree = 0; tree < 50; ++tree) {
    const PotentialExpr e(gen.gen(4), 2);
    for (int s = 0; s < 20; ++s) EXPECT_TRUE(std::isfinite(e.eval(gen.point(3.0))));
  }
}

}  // namespace
