#include "msv/matrix_functions.hpp"
#include "msv/model.hpp"

#include <gtest/gtest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <limits>
#include <random>

namespace {

using namespace msv;
using Strings = std::vector<std::vector<std::string>>;

constexpr double kInf = std::numeric_limits<double>::infinity();

MatrixField field(const Strings& rows, int d) {
  std::vector<std::vector<PotentialExpr>> e;
  for (const auto& r : rows) {
    e.emplace_back();
    for (const auto& s : r) e.back().push_back(expr::parse(s, d));
  }
  return MatrixField(e);
}

DiffusionField diffusion(const Strings& rows, int d) {
  std::vector<std::vector<PotentialExpr>> e;
  for (const auto& r : rows) {
    e.emplace_back();
    for (const auto& s : r) e.back().push_back(expr::parse(s, d));
  }
  return DiffusionField(e);
}

// System whose Vt equals `w` exactly (v = 0).
SystemSpec with_vtilde(const Strings& w, int d = 1) { return make_system(d, {}, w, "0"); }

TEST(Ellipticity, Examples) {
  const auto s1 = make_samples(2);
  auto r = ellipticity_check(DiffusionField::identity(2), s1);
  EXPECT_EQ(r.verdict, Verdict::HoldsOnSample);
  EXPECT_DOUBLE_EQ(r.get("eta1"), 1.0);
  EXPECT_DOUBLE_EQ(r.get("eta2"), 1.0);

  Eigen::Matrix2d q;
  q << 2, 1, 1, 2;
  r = ellipticity_check(DiffusionField::constant(q), s1);
  EXPECT_NEAR(r.get("eta1"), 1.0, 1e-14);
  EXPECT_NEAR(r.get("eta2"), 3.0, 1e-14);

  r = ellipticity_check(diffusion({{"|x|^2", "0"}, {"0", "1"}}, 2), s1);
  EXPECT_EQ(r.verdict, Verdict::UnboundedTrend);
}

TEST(Dissipativity, Examples) {
  const auto s = make_samples(1);
  EXPECT_NEAR(dissipativity_check(field({{"-1", "-x"}, {"x", "-1"}}, 1), s).get("beta"), -1.0, 1e-14);

  auto r = dissipativity_check(field({{"0", "-x"}, {"x", "0"}}, 1), s);
  EXPECT_NEAR(r.get("beta"), 0.0, 1e-14);
  EXPECT_EQ(r.verdict, Verdict::Fails);

  r = dissipativity_check(field({{"-(1+|x|^2)", "0"}, {"0", "-(1+|x|^2)"}}, 1), s);
  EXPECT_DOUBLE_EQ(r.get("beta"), -1.0);
  EXPECT_EQ(r.verdict, Verdict::HoldsOnSample);
}

TEST(Dissipativity, InvariantUnderAntisymmetricPerturbation) {
  const auto s = make_samples(2);
  const Strings base = {{"-(2+|x|^2)", "x0", "0.5"}, {"x0", "-3", "x1"}, {"0.5", "x1", "-(1+|x|^1.5)"}};
  const double beta = dissipativity_check(field(base, 2), s).get("beta");
  const std::vector<Strings> anti = {
      {{"0", "x0*x1", "-x0"}, {"-(x0*x1)", "0", "3"}, {"x0", "-3", "0"}},
      {{"0", "1+|x|^4", "0"}, {"-(1+|x|^4)", "0", "log1p|x|"}, {"0", "-log1p|x|", "0"}},
  };
  for (const auto& a : anti) {
    const auto perturbed = field(base, 2).plus(field(a, 2));
    // Entries reach ~1e7 on the outer shell; the tolerance is relative to that scale.
    EXPECT_NEAR(dissipativity_check(perturbed, s).get("beta"), beta, 1e-6);
  }
  // Per sample, not just at the maximum.
  for (const auto& shell : s.shells)
    for (const auto& x : shell.points) {
      const Eigen::MatrixXd w0 = field(base, 2).eval(x);
      const Eigen::MatrixXd w1 = field(base, 2).plus(field(anti[0], 2)).eval(x);
      EXPECT_LE((0.5 * (w0 + w0.transpose()) - 0.5 * (w1 + w1.transpose())).cwiseAbs().maxCoeff(),
                1e-12 * w0.cwiseAbs().maxCoeff());
    }
}

TEST(GradientCondition, FractionalGrowth) {
  const auto r = gradient_condition_check(field({{"-(1+|x|^1.5)"}}, 1), default_gamma_grid(), make_samples(1));
  EXPECT_EQ(r.verdict, Verdict::HoldsOnSample);
  EXPECT_NEAR(r.get("gamma"), 0.35, 1e-12);
  for (double g : default_gamma_grid()) {
    char key[32];
    std::snprintf(key, sizeof key, "holds(%g)", g);
    EXPECT_EQ(r.get(key), g >= 1.0 / 3.0 ? 1.0 : 0.0) << key;
  }
}

TEST(GradientCondition, QuarticNeverHolds) {
  const auto r = gradient_condition_check(field({{"-(1+|x|^4)"}}, 1), default_gamma_grid(), make_samples(1));
  EXPECT_EQ(r.verdict, Verdict::UnboundedTrend);
  EXPECT_TRUE(std::isnan(r.get("gamma")));
}

TEST(GradientCondition, ConstantNegativeDefinite) {
  const auto r =
      gradient_condition_check(field({{"-2", "0.5"}, {"0.5", "-1"}}, 2), default_gamma_grid(), make_samples(2));
  EXPECT_EQ(r.verdict, Verdict::HoldsOnSample);
  EXPECT_EQ(r.get("gamma"), 0.0);
  EXPECT_EQ(r.get("sup_s(0)"), 0.0);
}

TEST(GradientCondition, UndefinedPowerFails) {
  const auto r = gradient_condition_check(field({{"0", "-x"}, {"x", "0"}}, 1), default_gamma_grid(), make_samples(1));
  EXPECT_EQ(r.verdict, Verdict::Fails);
  ASSERT_TRUE(r.witness);
}

// The accepted gamma approaches max(0, 1 - 1/r) as radii and the gamma grid refine.
TEST(GradientCondition, AcceptedGammaConverges) {
  std::vector<double> fine;
  for (int k = 0; k < 50; ++k) fine.push_back(0.01 * k);
  SampleSpec spec;
  spec.levels = 24;
  for (double r : {1.0, 1.25, 1.5, 1.8}) {
    char v[64];
    std::snprintf(v, sizeof v, "-(1+|x|^%g)", r);
    const double expected = std::max(0.0, 1.0 - 1.0 / r);
    const double coarse = gradient_condition_check(field({{v}}, 1), default_gamma_grid(), make_samples(1)).get("gamma");
    const double refined = gradient_condition_check(field({{v}}, 1), fine, make_samples(1, spec)).get("gamma");
    EXPECT_LE(std::abs(refined - expected), 0.03) << "r = " << r;
    EXPECT_LE(std::abs(refined - expected), std::abs(coarse - expected) + 1e-12) << "r = " << r;
  }
}

TEST(GradRatio, Calibrations) {
  const auto s = make_samples(1);
  EXPECT_NEAR(grad_ratio_check(expr::parse("1+|x|^2", 1), s).get("c"), 1.0, 1e-6);
  EXPECT_NEAR(grad_ratio_check(expr::parse("exp|x|", 1), s).get("c"), 1.0, 1e-9);
  // max of 4t^3 / (1 + t^4) at t = 3^(1/4)
  const double t = std::pow(3.0, 0.25);
  const auto r = grad_ratio_check(expr::parse("1+|x|^4", 1), s);
  EXPECT_NEAR(r.get("c"), 4 * t * t * t / (1 + t * t * t * t), 1e-6);
  EXPECT_NEAR(r.get("c"), std::pow(3.0, 0.75), 1e-6);
  EXPECT_NEAR(r.get("argmax_radius"), t, 1e-3);
}

TEST(GradRatio, NegativePotentialFails) {
  EXPECT_EQ(grad_ratio_check(expr::parse("1-|x|^2", 1), make_samples(1)).verdict, Verdict::Fails);
}

TEST(Okazawa, Constants) {
  const auto s = make_samples(1);
  auto r = okazawa_check(expr::parse("1+|x|^2", 1), DiffusionField::identity(1), default_eps_grid(), s);
  EXPECT_NEAR(r.get("a"), 1.0, 1e-6);
  EXPECT_EQ(r.get("b"), 0.0);

  r = okazawa_check(expr::parse("3", 1), DiffusionField::identity(1), default_eps_grid(), s);
  EXPECT_EQ(r.get("a"), 0.0);
  EXPECT_EQ(r.get("b"), 0.0);

  // a = c^2 with c from the gradient ratio.
  const double c = grad_ratio_check(expr::parse("1+|x|^4", 1), s).get("c");
  r = okazawa_check(expr::parse("1+|x|^4", 1), DiffusionField::identity(1), default_eps_grid(), s);
  EXPECT_NEAR(r.get("a"), c * c, 1e-6 * c * c);

  // A Q-weighted norm scales a by eta2.
  const auto s2 = make_samples(2);
  Eigen::Matrix2d q;
  q << 2, 0, 0, 1;
  r = okazawa_check(expr::parse("1+|x|^2", 2), DiffusionField::constant(q), default_eps_grid(), s2);
  EXPECT_NEAR(r.get("a"), 2.0 * r.get("c") * r.get("c"), 1e-9);
  EXPECT_LE(r.get("a_measured"), r.get("a") * (1 + 1e-9));
  EXPECT_FALSE(r.notes.empty());
}

// Generalized symmetric eigenproblem oracle for a constant field with
// negative definite symmetric part: the ratio of quadratic forms on
// z = (a, b) in R^{2m} is minimized at 1 / max |eig(K, S)|.
double sectoriality_oracle(const Eigen::MatrixXd& w) {
  const int m = static_cast<int>(w.rows());
  const Eigen::MatrixXd sym = -0.5 * (w + w.transpose());
  const Eigen::MatrixXd d = w - w.transpose();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(2 * m, 2 * m), k = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  s.topLeftCorner(m, m) = sym;
  s.bottomRightCorner(m, m) = sym;
  k.topRightCorner(m, m) = 0.5 * d;
  k.bottomLeftCorner(m, m) = 0.5 * d.transpose();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(k, s);
  const double top = es.eigenvalues().cwiseAbs().maxCoeff();
  return top == 0.0 ? kInf : 1.0 / top;
}

TEST(Sectoriality, MatchesGeneralizedEigenOracle) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  for (int m : {2, 3}) {
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::MatrixXd g(m, m), a(m, m);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          g(i, j) = n(rng);
          a(i, j) = n(rng);
        }
      const Eigen::MatrixXd w = -(g * g.transpose() + 0.2 * Eigen::MatrixXd::Identity(m, m)) + (a - a.transpose());
      const double expect = sectoriality_oracle(w);
      EXPECT_NEAR(sectoriality_at(w), expect, 1e-6 * expect) << w;
    }
  }
}

TEST(Sectoriality, CoupledTwoByTwo) {
  for (const char* r : {"1", "2", "3.5"}) {
    const std::string d = std::string("-(1+|x|^") + r + ")";
    const auto rep = sectoriality_check(with_vtilde({{d, "-x"}, {"x", d}}), make_samples(1));
    EXPECT_EQ(rep.verdict, Verdict::HoldsOnSample) << r;
    EXPECT_GE(rep.get("M"), 1.0 - 1e-3) << r;
  }
}

TEST(Sectoriality, AntisymmetricAndSymmetricLimits) {
  const auto anti = sectoriality_check(with_vtilde({{"0", "-x"}, {"x", "0"}}), make_samples(1));
  EXPECT_EQ(anti.get("M"), 0.0);
  EXPECT_EQ(anti.verdict, Verdict::Fails);
  const auto sym = sectoriality_check(with_vtilde({{"-(1+|x|^2)", "0.5"}, {"0.5", "-2"}}), make_samples(1));
  EXPECT_EQ(sym.get("M"), kInf);
  EXPECT_EQ(sym.verdict, Verdict::HoldsOnSample);
}

TEST(OffdiagonalSign, Examples) {
  const auto s = make_samples(1);
  const std::string neg_v = "-(1+|x|^2)";
  EXPECT_EQ(offdiagonal_sign_check(with_vtilde({{neg_v, "1+|x|"}, {"1+|x|", neg_v}}), s).verdict,
            Verdict::HoldsOnSample);
  const auto r = offdiagonal_sign_check(with_vtilde({{neg_v, "1+|x|"}, {"-(1+|x|)", neg_v}}), s);
  EXPECT_EQ(r.verdict, Verdict::Fails);
  ASSERT_TRUE(r.witness);
  EXPECT_EQ(r.witness->i, 2);
  EXPECT_EQ(r.witness->j, 1);
  EXPECT_EQ(offdiagonal_sign_check(with_vtilde({{neg_v, "0"}, {"0", "-3"}}), s).verdict, Verdict::HoldsOnSample);
}

TEST(Coercivity, Examples) {
  const auto s = make_samples(1);
  auto r = coercivity_check(field({{"-(1+|x|^2)", "0"}, {"0", "-(1+|x|^2)"}}, 1), s);
  EXPECT_EQ(r.verdict, Verdict::HoldsOnSample);
  EXPECT_NEAR(r.get("growth_exponent"), 2.0, 0.01);
  r = coercivity_check(field({{"0", "-x"}, {"x", "0"}}, 1), s);
  EXPECT_EQ(r.verdict, Verdict::HoldsOnSample);
  EXPECT_NEAR(r.get("growth_exponent"), 1.0, 1e-9);
  EXPECT_EQ(coercivity_check(field({{"-2", "1"}, {"1", "-2"}}, 1), s).verdict, Verdict::Fails);
}

TEST(LittleO, Examples) {
  const auto s = make_samples(1);
  const auto v = expr::parse("1+|x|^4", 1);
  EXPECT_EQ(little_o_check(field({{"-(1+|x|)"}}, 1), v, 4, s).verdict, Verdict::HoldsOnSample);
  EXPECT_EQ(little_o_check(field({{"-|x|^4"}}, 1), v, 4, s).verdict, Verdict::Fails);
  EXPECT_EQ(little_o_check(field({{"0"}}, 1), v, 4, s).verdict, Verdict::HoldsOnSample);
}

// Every FAILS witness re-evaluated from scratch violates its inequality by
// more than 1e-12.
TEST(Witness, ReevaluatedWitnessesViolate) {
  const auto s1 = make_samples(1);
  {
    const auto w = field({{"0", "-x"}, {"x", "1-|x|^2"}}, 1);
    const auto r = dissipativity_check(w, s1);
    ASSERT_EQ(r.verdict, Verdict::Fails);
    const auto& wit = *r.witness;
    const Eigen::MatrixXd wx = w.eval(wit.x);
    const double lhs = wit.xi.dot(0.5 * (wx + wx.transpose()) * wit.xi) / wit.xi.squaredNorm();
    EXPECT_NEAR(lhs, wit.lhs, 1e-12);
    EXPECT_GT(lhs - (-kStrictMargin), 1e-12);
  }
  {
    Eigen::Matrix2d q;
    q << 1, 0, 0, -0.5;
    const auto r = ellipticity_check(DiffusionField::constant(q), make_samples(2));
    ASSERT_EQ(r.verdict, Verdict::Fails);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(q);
    EXPECT_NEAR(es.eigenvalues()(0), r.witness->lhs, 1e-12);
    EXPECT_GT(r.witness->rhs - es.eigenvalues()(0), 1e-12);
  }
  {
    const auto spec = with_vtilde({{"-1", "-(1+|x|)"}, {"2", "-1"}});
    const auto r = offdiagonal_sign_check(spec, s1);
    ASSERT_EQ(r.verdict, Verdict::Fails);
    const auto& wit = *r.witness;
    const double entry = spec.vtilde_at(wit.x)(wit.i - 1, wit.j - 1);
    EXPECT_EQ(entry, wit.lhs);
    EXPECT_LT(entry, -1e-12);
  }
  {
    const auto spec = with_vtilde({{"0", "-x"}, {"x", "0"}});
    const auto r = sectoriality_check(spec, s1);
    ASSERT_EQ(r.verdict, Verdict::Fails);
    const auto& wit = *r.witness;
    const Eigen::MatrixXd w = spec.vtilde_at(wit.x);
    const Eigen::VectorXd a = wit.xi.head(2), b = wit.xi.tail(2);
    const Eigen::Matrix2d sym = 0.5 * (w + w.transpose());
    const double neg_re = -(a.dot(sym * a) + b.dot(sym * b));
    const double im = a.dot((w - w.transpose()) * b);
    EXPECT_NEAR(neg_re, wit.lhs, 1e-12);
    EXPECT_GT(kStrictMargin * std::abs(im) - neg_re, 1e-12);
  }
}

TEST(SystemSpec, VtildeSubtractsScalarOnTheDiagonal) {
  const auto s = make_system(1, {}, {{"-1", "0.5"}, {"0.5", "-1"}}, "1+|x|^2", 2.0);
  Eigen::VectorXd x(1);
  x << 2.0;
  Eigen::Matrix2d expect;
  expect << -6, 0.5, 0.5, -6;
  EXPECT_TRUE(s.vtilde_at(x).isApprox(expect));
  EXPECT_TRUE(s.symmetric());
  EXPECT_THROW(make_system(1, {}, {{"1", "2"}}, "1"), std::invalid_argument);
  EXPECT_THROW(DiffusionField(std::vector<std::vector<PotentialExpr>>{
                   {expr::parse("1", 1), expr::parse("x", 1)}, {expr::parse("2", 1), expr::parse("1", 1)}}),
               std::invalid_argument);
}

TEST(PrincipalPower, SymmetricRouteAgreesWithSchur) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd g(3, 3);
    for (int k = 0; k < 9; ++k) g.data()[k] = n(rng);
    const Eigen::MatrixXd spd = g * g.transpose() + 0.5 * Eigen::MatrixXd::Identity(3, 3);
    for (double p : {-0.45, -0.2, 0.5}) {
      const Eigen::MatrixXcd ours = principal_power(spd, p);
      const Eigen::MatrixXcd schur = Eigen::MatrixXcd(spd.cast<std::complex<double>>()).pow(p);
      EXPECT_LE((ours - schur).cwiseAbs().maxCoeff(), 1e-10 * schur.cwiseAbs().maxCoeff());
      EXPECT_LE((ours.real() - symmetric_power(spd, p)).cwiseAbs().maxCoeff(), 1e-12 * schur.cwiseAbs().maxCoeff());
    }
  }
}

TEST(PrincipalPower, NonsymmetricSquareRoot) {
  Eigen::Matrix2d m;
  m << 1, 3, -3, 1;  // eigenvalues 1 +- 3i
  const Eigen::MatrixXcd r = principal_power(m, 0.5);
  EXPECT_LE((r * r - m.cast<std::complex<double>>()).cwiseAbs().maxCoeff(), 1e-12);
  Eigen::Matrix2d bad;
  bad << 0, -1, 1, 0;
  EXPECT_THROW(principal_power(bad, -0.25), std::domain_error);
}

}  // namespace
