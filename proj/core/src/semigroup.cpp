#include "msv/semigroup.hpp"

#include "msv/fit.hpp"
#include "msv/kernel.hpp"
#include "msv/smooth_fields.hpp"

#include <algorithm>
#include <cmath>

namespace msv {

ContractionReport contraction_check(const DiscreteOperator& op, const Propagator& prop,
                                    const std::vector<double>& t_grid, const std::vector<double>& p_grid, int trials,
                                    std::uint64_t seed) {
  ContractionReport r;
  for (int trial = 0; trial < trials; ++trial) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(trial);
    const Eigen::VectorXd f = sample_field(random_bump_field(op.grid.d, op.m, op.grid.R, s), op.grid);
    for (double t : t_grid) {
      const Eigen::VectorXd g = prop.apply(f, t);
      for (double p : p_grid) {
        const double den = discrete_norm(f, op.m, p, op.grid);
        if (den == 0.0) continue;
        ContractionRow row{t, p, trial, s, discrete_norm(g, op.m, p, op.grid) / den};
        if (row.ratio > r.max_ratio) {
          r.max_ratio = row.ratio;
          r.worst = row;
        }
        r.rows.push_back(row);
      }
    }
  }
  r.pass = r.max_ratio <= 1.0 + 1e-6;
  return r;
}

UltracontractivityReport lp_lq_check(const DiscreteOperator& op, const Propagator& prop,
                                     const std::vector<double>& t_grid, const std::vector<Eigen::Index>& sources) {
  UltracontractivityReport r;
  for (double t : t_grid) {
    double mx = 0.0;
    for (Eigen::Index y : sources) mx = std::max(mx, kernel_slice(op, prop, t, y).values.cwiseAbs().maxCoeff());
    r.t.push_back(t);
    r.m_tilde.push_back(std::pow(t, 0.5 * op.grid.d) * mx);
  }
  const auto [lo, hi] = std::minmax_element(r.m_tilde.begin(), r.m_tilde.end());
  r.spread = *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
  r.pass = r.spread <= 10.0;
  return r;
}

Eigen::VectorXd scalar_on_unknowns(const PotentialExpr& v, const GridSpec& grid, int m) {
  return sample(grid, m, [&](const Eigen::VectorXd& x) {
    return Eigen::VectorXd::Constant(m, v.eval({x.data(), static_cast<std::size_t>(x.size())}));
  });
}

TrotterReport trotter_kato_check(const DiscreteOperator& a_v, const Eigen::VectorXd& v_nodes, double t,
                                 const std::vector<int>& n_grid, const Eigen::VectorXd& f,
                                 const PropagatorOptions& popts) {
  Eigen::SparseMatrix<double> a = a_v.A;
  for (Eigen::Index k = 0; k < a.rows(); ++k) a.coeffRef(k, k) += v_nodes(k);
  const Eigen::VectorXd ref = Propagator(a, popts).apply(f, t);
  const Propagator pv(a_v.A, popts);

  TrotterReport r;
  r.t = t;
  for (int n : n_grid) {
    const double dt = t / n;
    const Eigen::VectorXd damp = (-dt * v_nodes.array()).exp().matrix();
    Eigen::VectorXd u = f;
    for (int s = 0; s < n; ++s) u = damp.cwiseProduct(pv.apply(u, dt));
    r.n.push_back(n);
    r.deviation.push_back((u - ref).norm());
  }
  r.exact = std::all_of(r.deviation.begin(), r.deviation.end(), [&](double e) { return e <= 1e-12 * f.norm(); });
  if (r.n.size() >= 2 && !r.exact) {
    std::vector<double> ln, le;
    for (std::size_t k = 0; k < r.n.size(); ++k) {
      ln.push_back(std::log(r.n[k]));
      le.push_back(std::log(r.deviation[k]));
    }
    r.slope = fit_line(ln, le).slope;
  }
  r.pass = r.exact || r.slope <= -0.8;
  return r;
}

double maximal_ratio(const Eigen::SparseMatrix<double>& a_diff, const Eigen::SparseMatrix<double>& a_pot,
                     const std::vector<Eigen::VectorXd>& draws, int m, double p, const GridSpec& grid, int* skipped) {
  double best = 0.0;
  int skip = 0;
  const Eigen::SparseMatrix<double> a = a_diff + a_pot;
  for (const auto& u : draws) {
    const double den = discrete_norm(a * u, m, p, grid);
    if (den < 1e-12) {
      ++skip;
      continue;
    }
    best = std::max(best, (discrete_norm(a_diff * u, m, p, grid) + discrete_norm(a_pot * u, m, p, grid)) / den);
  }
  if (skipped) *skipped = skip;
  return best;
}

namespace {

double maximal_on(const SystemSpec& spec, const GridSpec& grid, double p, int trials, std::uint64_t seed,
                  int* skipped) {
  const int m = spec.m;
  const DiscreteOperator diff =
      assemble_operator(spec.Q, m, [m](const Eigen::VectorXd&) { return Eigen::MatrixXd::Zero(m, m); }, grid);
  std::vector<Eigen::Triplet<double>> trip;
  for (Eigen::Index node = 0; node < grid.node_count(); ++node) {
    const Eigen::MatrixXd w = spec.vtilde_at(grid.point(node));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        if (w(i, j) != 0.0) trip.emplace_back(node * m + i, node * m + j, -w(i, j));
  }
  Eigen::SparseMatrix<double> pot(diff.size(), diff.size());
  pot.setFromTriplets(trip.begin(), trip.end());
  std::vector<Eigen::VectorXd> draws;
  for (int k = 0; k < trials; ++k)
    draws.push_back(sample_field(random_bump_field(grid.d, m, grid.R, seed + static_cast<std::uint64_t>(k)), grid));
  return maximal_ratio(diff.A, pot, draws, m, p, grid, skipped);
}

}  // namespace

MaximalReport maximal_inequality_probe(const SystemSpec& spec, const GridSpec& grid, double p, int trials,
                                       std::uint64_t seed) {
  MaximalReport r;
  r.p = p;
  int s1 = 0, s2 = 0;
  r.c_hat = maximal_on(spec, grid, p, trials, seed, &s1);
  r.c_hat_refined = maximal_on(spec, build_grid(grid.d, grid.R, 2 * grid.N - 1), p, trials, seed, &s2);
  r.skipped = s1 + s2;
  const double lo = std::min(r.c_hat, r.c_hat_refined);
  r.stability_ratio = lo > 0.0 ? std::max(r.c_hat, r.c_hat_refined) / lo : std::numeric_limits<double>::infinity();
  r.pass = r.c_hat >= 1.0 && r.c_hat_refined >= 1.0 && r.stability_ratio <= 1.5;
  return r;
}

}  // namespace msv
