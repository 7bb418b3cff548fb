#include "msv/kernel.hpp"
#include "msv/semigroup.hpp"
#include "msv/smooth_fields.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

namespace {

using namespace msv;

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kFreeC1 = 1.0 / std::sqrt(4.0 * std::numbers::pi);

SystemSpec free_system() { return make_system(1, {}, {{"0"}}, "0"); }
SystemSpec symmetric_coupled() { return make_system(1, {}, {{"-1", "0.5"}, {"0.5", "-1"}}, "1+|x|^2", 2.0); }

Eigen::VectorXd bumps(const GridSpec& g, int m, std::uint64_t seed) {
  return sample_field(random_bump_field(g.d, m, g.R, seed), g);
}

TEST(Propagate, ZeroTimeIsIdentity) {
  const auto op = assemble(symmetric_coupled(), build_grid(1, 6, 121));
  const auto f = bumps(op.grid, 2, 1);
  EXPECT_EQ(Propagator(op.A).apply(f, 0.0), f);
  PropagatorOptions krylov;
  krylov.dense_limit = 0;
  EXPECT_EQ(Propagator(op.A, krylov).apply(f, 0.0), f);
}

TEST(Propagate, ConstantShiftFactorsOut) {
  const auto g = build_grid(1, 6, 241);
  const auto free = assemble(free_system(), g);
  const auto shifted = assemble(make_system(1, {}, {{"-0.7"}}, "0"), g);
  const auto f = bumps(g, 1, 2);
  for (double t : {0.1, 0.5, 1.0}) {
    const Eigen::VectorXd a = Propagator(shifted.A).apply(f, t);
    const Eigen::VectorXd b = std::exp(-0.7 * t) * Propagator(free.A).apply(f, t);
    EXPECT_LE((a - b).norm(), 1e-12 * b.norm()) << t;
  }
}

// On [-7, 7] the free kernel at the boundary is below 2e-6 for t <= 1;
// h = 0.007 keeps the stencil error t (h^2/12) |d^4 k| under 8e-5 at t = 0.05.
TEST(Propagate, FreeHeatKernel) {
  const auto op = assemble(free_system(), build_grid(1, 7, 2001));
  const Propagator prop(op.A);
  const auto y = op.grid.node_at(Eigen::VectorXd::Zero(1));
  for (double t : {0.05, 0.2, 1.0}) {
    const auto s = kernel_slice(op, prop, t, y);
    double err = 0;
    for (Eigen::Index k = 0; k < op.grid.node_count(); ++k) {
      const double x = op.grid.point(k)(0);
      err = std::max(err, std::abs(s.at(k, 0, 0) - std::exp(-x * x / (4 * t)) / std::sqrt(4 * std::numbers::pi * t)));
    }
    EXPECT_LE(err, 1e-4) << t;
  }
}

TEST(PropagateProperty, SemigroupLaw) {
  const auto op = assemble(symmetric_coupled(), build_grid(1, 6, 241));
  for (Eigen::Index limit : {Eigen::Index(2048), Eigen::Index(0)}) {
    PropagatorOptions o;
    o.dense_limit = limit;
    const Propagator prop(op.A, o);
    const auto f = bumps(op.grid, 2, 3);
    for (double s : {0.1, 0.3})
      for (double t : {0.1, 0.3}) {
        const Eigen::VectorXd two = prop.apply(prop.apply(f, s), t);
        EXPECT_LE((two - prop.apply(f, s + t)).norm(), 1e-7 * f.norm()) << s << ' ' << t;
      }
  }
}

TEST(PropagateProperty, KrylovMatchesDense) {
  const auto op = assemble(make_system(2, {}, {{"-1", "0.3"}, {"0.3", "-2"}}, "1+|x|^2"), build_grid(2, 4, 31));
  PropagatorOptions krylov;
  krylov.dense_limit = 0;
  const Propagator dense(op.A), kry(op.A, krylov);
  ASSERT_TRUE(dense.dense());
  ASSERT_FALSE(kry.dense());
  const auto f = bumps(op.grid, 2, 4);
  for (double t : {0.01, 0.3, 2.0}) {
    const Eigen::VectorXd a = dense.apply(f, t), b = kry.apply(f, t);
    EXPECT_LE((a - b).norm(), 1e-7 * a.norm()) << t;
  }
  Eigen::MatrixXd cols(op.size(), 2);
  cols << f, bumps(op.grid, 2, 5);
  EXPECT_LE((dense.apply(cols, 0.5) - kry.apply(cols, 0.5)).norm(), 1e-7 * cols.norm());
}

TEST(PropagateProperty, MassNonincreasingForDissipativeSystems) {
  const auto op = assemble(symmetric_coupled(), build_grid(1, 6, 241));
  const Propagator prop(op.A);
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto f = bumps(op.grid, 2, seed);
    double previous = discrete_norm(f, 2, 1, op.grid);
    for (double t : {0.05, 0.1, 0.2, 0.5, 1.0, 2.0}) {
      const double mass = discrete_norm(prop.apply(f, t), 2, 1, op.grid);
      EXPECT_LE(mass, previous * (1 + 1e-12)) << t;
      previous = mass;
    }
  }
}

TEST(Kernel, SymmetricSystemTransposes) {
  const auto op = assemble(symmetric_coupled(), build_grid(1, 6, 241));
  const Propagator prop(op.A);
  const auto src = probe_sources(op.grid);
  for (std::size_t a = 0; a < src.size(); ++a)
    for (std::size_t b = a + 1; b < src.size(); ++b) {
      const auto sa = kernel_slice(op, prop, 0.5, src[a]);
      const auto sb = kernel_slice(op, prop, 0.5, src[b]);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) EXPECT_NEAR(sa.at(src[b], i, j), sb.at(src[a], j, i), 1e-8);
    }
}

TEST(Kernel, DecoupledComponentsHaveNoCrossKernel) {
  const auto op = assemble(make_system(1, {}, {{"-|x|", "0"}, {"0", "-|x|"}}, "1"), build_grid(1, 6, 121));
  const auto s = kernel_slice(op, Propagator(op.A), 0.5, op.grid.node_at(Eigen::VectorXd::Zero(1)));
  for (Eigen::Index k = 0; k < op.grid.node_count(); ++k) {
    EXPECT_EQ(s.at(k, 0, 1), 0.0);
    EXPECT_EQ(s.at(k, 1, 0), 0.0);
  }
}

TEST(Kernel, EigenExpansionConsistency) {
  const auto op = assemble(symmetric_coupled(), build_grid(1, 8, 161));
  const Propagator prop(op.A);
  const int k = 40;
  const auto res = eigen_lowest(op, k);
  const double t = 0.5;
  // Sum over the omitted modes of exp(-lambda t) |psi(x)| |psi(y)| with |psi|^2 <= 1/h^d.
  const double bound = (op.size() - k) * std::exp(-res.lambdas(k - 1) * t) / op.grid.cell_volume();
  for (auto y : probe_sources(op.grid)) {
    const auto a = kernel_slice(op, prop, t, y);
    const auto b = kernel_from_eigenpairs(res, op, t, y);
    EXPECT_LE((a.values - b.values).cwiseAbs().maxCoeff(), bound + 1e-10);
  }
}

TEST(Contraction, SymmetricPositiveSemidefiniteInL2) {
  const auto op = assemble(symmetric_coupled(), build_grid(1, 6, 241));
  const auto r = contraction_check(op, Propagator(op.A), {0.1, 0.5, 1.0}, {2.0}, 4, 1);
  EXPECT_LE(r.max_ratio, 1.0 + 1e-12);
  EXPECT_TRUE(r.pass);
}

TEST(Contraction, FreeLaplacianInL1AndLinf) {
  const auto op = assemble(free_system(), build_grid(1, 6, 241));
  const auto r = contraction_check(op, Propagator(op.A), {0.1, 0.5, 1.0}, {1.0, kInf}, 4, 1);
  EXPECT_LE(r.max_ratio, 1.0 + 1e-9);
}

// Vt = +1: the lowest mode grows like exp((1 - (pi/2R)^2) t).
TEST(Contraction, BrokenDissipativityDetected) {
  const auto op = assemble(make_system(1, {}, {{"1"}}, "0"), build_grid(1, 8, 161));
  const auto r = contraction_check(op, Propagator(op.A), {0.1, 0.5, 1.0, 2.0}, {2.0, kInf}, 4, 1);
  EXPECT_GT(r.max_ratio, 1.0 + 1e-6);
  EXPECT_FALSE(r.pass);
}

TEST(Ultracontractivity, FreeConstant) {
  const auto op = assemble(free_system(), build_grid(1, 4, 801));
  const Propagator prop(op.A);
  const auto y = std::vector<Eigen::Index>{op.grid.node_at(Eigen::VectorXd::Zero(1))};
  const auto r = lp_lq_check(op, prop, {0.1, 0.5, 1.0}, y);
  for (double m : r.m_tilde) EXPECT_NEAR(m, kFreeC1, 1e-3 * kFreeC1);
  EXPECT_TRUE(r.pass);

  const auto dop = assemble(make_system(1, {}, {{"-1"}}, "1+|x|^2"), op.grid);
  const auto d = lp_lq_check(dop, Propagator(dop.A), {0.1, 0.5, 1.0}, y);
  for (std::size_t k = 0; k < d.m_tilde.size(); ++k) EXPECT_LE(d.m_tilde[k], r.m_tilde[k]);
}

TEST(TrotterKato, ConstantScalarCommutes) {
  const auto g = build_grid(1, 6, 121);
  const auto spec = make_system(1, {}, {{"-|x|"}}, "2");
  const auto a_v = assemble_operator(spec.Q, 1, [&](const Eigen::VectorXd& x) { return spec.V.eval(x); }, g);
  const auto r = trotter_kato_check(a_v, scalar_on_unknowns(spec.v, g, 1), 0.5, {1, 4, 16}, bumps(g, 1, 1));
  EXPECT_TRUE(r.exact);
  for (double dev : r.deviation) EXPECT_LE(dev, 1e-12 * bumps(g, 1, 1).norm());
}

TEST(TrotterKato, FirstOrderForHarmonicSplit) {
  const auto g = build_grid(1, 8, 321);
  const auto spec = make_system(1, {}, {{"0"}}, "1+|x|^2");
  const auto a_v = assemble_operator(spec.Q, 1, [&](const Eigen::VectorXd& x) { return spec.V.eval(x); }, g);
  const auto r =
      trotter_kato_check(a_v, scalar_on_unknowns(spec.v, g, 1), 0.5, {1, 4, 8, 16, 32, 64, 128, 256}, bumps(g, 1, 7));
  EXPECT_NEAR(r.slope, -1.0, 0.2);
  EXPECT_GT(r.deviation.front(), r.deviation.back());
  for (std::size_t k = 1; k < r.deviation.size(); ++k) EXPECT_LT(r.deviation[k], r.deviation[k - 1]);
}

TEST(GaussianFit, FreeKernel) {
  const auto op = assemble(free_system(), build_grid(1, 10, 2001));
  const Propagator prop(op.A);
  const auto y = op.grid.node_at(Eigen::VectorXd::Zero(1));
  const std::vector<KernelSlice> s{kernel_slice(op, prop, 0.2, y), kernel_slice(op, prop, 0.5, y)};
  const auto g = gaussian_fit(s);
  EXPECT_TRUE(g.pass);
  EXPECT_NEAR(g.C2, 1.0, 0.02);
  EXPECT_NEAR(g.C1, kFreeC1, 0.02 * kFreeC1);
}

TEST(GaussianFit, ScaledDiffusion) {
  const auto spec = make_system(1, {{"2"}}, {{"0"}}, "0");
  const auto op = assemble(spec, build_grid(1, 14, 1401));
  const Propagator prop(op.A);
  const auto y = op.grid.node_at(Eigen::VectorXd::Zero(1));
  const std::vector<KernelSlice> s{kernel_slice(op, prop, 0.2, y), kernel_slice(op, prop, 0.5, y)};
  EXPECT_NEAR(gaussian_fit(s).C2, 0.5, 0.01);
}

TEST(GaussianFit, EnvelopeImpliesKernelBound) {
  for (const auto& spec : {symmetric_coupled(),
                           make_system(1, {}, {{"1", "1+|x|"}, {"-(1+|x|)", "1"}}, "1+|x|^4", 4.0)}) {
    const auto op = assemble(spec, build_grid(1, 6, 241));
    const Propagator prop(op.A);
    std::vector<KernelSlice> s;
    for (double t : {0.1, 0.5, 1.0})
      for (auto y : probe_sources(op.grid)) s.push_back(kernel_slice(op, prop, t, y));
    const auto g = gaussian_fit(s);
    ASSERT_TRUE(g.pass);
    EXPECT_GT(g.C2, 0.0);
    for (const auto& sl : s) EXPECT_LE(std::sqrt(sl.t) * sl.values.cwiseAbs().maxCoeff(), 1.05 * g.C1);
  }
}

TEST(DiaNondia, DiagonalAndCoupledExamples) {
  for (const auto& spec : {make_system(1, {}, {{"-|x|", "0"}, {"0", "-1"}}, "1+|x|^2"), symmetric_coupled()}) {
    const auto op = assemble(spec, build_grid(1, 6, 241));
    const Propagator prop(op.A);
    DiaNondiaReport all;
    for (double t : {0.1, 0.5, 1.0})
      for (auto y : probe_sources(op.grid)) merge(all, offdiag_vs_diag_check(kernel_slice(op, prop, t, y)));
    EXPECT_TRUE(all.pass);
    EXPECT_LE(all.max_violation, 1e-9);
    EXPECT_FALSE(all.negative_diagonal);
  }
}

TEST(Positivity, SignOfCouplingDecides) {
  const auto g = build_grid(1, 6, 241);
  const std::vector<double> ts{0.1, 0.5, 1.0};
  auto probe = [&](const SystemSpec& s) {
    const auto op = assemble(s, g);
    return positivity_probe(op, Propagator(op.A), ts, probe_sources(g));
  };
  const auto pos = probe(symmetric_coupled());
  EXPECT_GE(pos.min_entry, -1e-9);
  EXPECT_TRUE(pos.consistent);

  const auto neg = probe(make_system(1, {}, {{"0", "1"}, {"-1", "0"}}, "1+|x|^2"));
  EXPECT_TRUE(neg.negative_found);
  EXPECT_FALSE(neg.offdiag_nonnegative);
  EXPECT_TRUE(neg.consistent);
  EXPECT_LT(neg.witness.value, -1e-9);

  const auto scalar = probe(make_system(1, {}, {{"-|x|"}}, "1+|x|^2"));
  EXPECT_GE(scalar.min_entry, -1e-9);
}

TEST(LowerBound, EqualityWhenDiagonalIsMinusV) {
  const auto spec = make_system(1, {}, {{"-(1+|x|^2)", "0"}, {"0", "-(1+|x|^2)"}}, "1+|x|^2");
  const auto g = build_grid(1, 6, 241);
  const auto y = g.node_at(Eigen::VectorXd::Zero(1));
  const auto r = lower_bound_check(spec, g, 0.5, y);
  EXPECT_NEAR(r.min_margin_diagonal, 0.0, 1e-9);
  // Uncoupled components have k_12 = 0 < k_2v, so the entrywise bound fails off the diagonal.
  EXPECT_LT(r.min_margin_offdiagonal, -1e-9);
  EXPECT_FALSE(r.pass);
}

TEST(LowerBound, ZeroDiagonalDominatesInTheBulk) {
  const auto spec = make_system(1, {}, {{"0"}}, "1+|x|^2");
  const auto g = build_grid(1, 6, 241);
  const auto y = g.node_at(Eigen::VectorXd::Zero(1));
  const auto r = lower_bound_check(spec, g, 0.5, y);
  EXPECT_TRUE(r.pass);
  const auto op = assemble(spec, g);
  const auto two_v = assemble(make_system(1, {}, {{"-(1+|x|^2)"}}, "1+|x|^2"), g);
  const double k = kernel_slice(op, Propagator(op.A), 0.5, y).at(y, 0, 0);
  const double k2 = kernel_slice(two_v, Propagator(two_v.A), 0.5, y).at(y, 0, 0);
  EXPECT_GT(k - k2, 1e-3);
}

TEST(LowerBound, PreconditionsEnforced) {
  const auto g = build_grid(1, 4, 81);
  const auto y = g.node_at(Eigen::VectorXd::Zero(1));
  EXPECT_THROW(lower_bound_check(make_system(1, {}, {{"1"}}, "1+|x|^2"), g, 0.5, y), std::invalid_argument);
  EXPECT_THROW(lower_bound_check(make_system(1, {}, {{"0", "-1"}, {"-1", "0"}}, "1"), g, 0.5, y),
               std::invalid_argument);
  EXPECT_THROW(lower_bound_check(make_system(1, {}, {{"0", "1"}, {"-1", "0"}}, "1"), g, 0.5, y),
               std::invalid_argument);
}

TEST(Decay, QuarticProfileExponent) {
  const auto op = assemble(make_system(1, {}, {{"0"}}, "1+|x|^4", 4.0), build_grid(1, 6, 481));
  const auto f = decay_profile_fit(op, Propagator(op.A), 0.5, 4.0);
  EXPECT_DOUBLE_EQ(f.decay_gamma, 3.0);
  EXPECT_DOUBLE_EQ(f.decay_beta, 1.0);
  EXPECT_GE(f.gamma_hat, 2.7);
  EXPECT_LE(f.gamma_hat, 3.3);
}

TEST(Decay, RefusesAlphaTwo) {
  const auto op = assemble(make_system(1, {}, {{"0"}}, "1+|x|^2", 2.0), build_grid(1, 6, 121));
  EXPECT_THROW(decay_profile_fit(op, Propagator(op.A), 0.5, 2.0), std::invalid_argument);
}

TEST(MaximalInequality, EstimateAtLeastOne) {
  for (const auto& spec : {symmetric_coupled(), make_system(1, {}, {{"-0.5"}}, "0"),
                           make_system(1, {}, {{"1", "1+|x|"}, {"-(1+|x|)", "1"}}, "1+|x|^4", 4.0)}) {
    const auto r = maximal_inequality_probe(spec, build_grid(1, 6, 121), 2.0, 6, 5);
    EXPECT_GE(r.c_hat, 1.0);
    EXPECT_GE(r.c_hat_refined, 1.0);
  }
}

TEST(MaximalInequality, ConstantPotentialStaysBounded) {
  const auto r = maximal_inequality_probe(make_system(1, {}, {{"-2"}}, "0"), build_grid(1, 6, 121), 2.0, 8, 9);
  EXPECT_LE(r.stability_ratio, 1.5);
  EXPECT_LE(r.c_hat, 3.0);
  EXPECT_TRUE(r.pass);
}

}  // namespace
