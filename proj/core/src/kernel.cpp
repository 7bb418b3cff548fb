#include "msv/kernel.hpp"

#include "msv/fit.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace msv {

KernelSlice kernel_slice(const DiscreteOperator& op, const Propagator& prop, double t, Eigen::Index y_node) {
  if (!(t > 0.0)) throw std::invalid_argument("kernel slice needs t > 0");
  if (y_node < 0 || y_node >= op.grid.node_count()) throw std::invalid_argument("source node out of range");
  const int m = op.m;
  Eigen::MatrixXd deltas = Eigen::MatrixXd::Zero(op.size(), m);
  for (int j = 0; j < m; ++j) deltas(y_node * m + j, j) = 1.0 / op.grid.cell_volume();
  KernelSlice s;
  s.t = t;
  s.source = y_node;
  s.grid = op.grid;
  s.m = m;
  s.values = prop.apply(deltas, t);
  return s;
}

KernelSlice kernel_from_eigenpairs(const SpectralResult& res, const DiscreteOperator& op, double t,
                                   Eigen::Index y_node) {
  const int m = op.m;
  KernelSlice s;
  s.t = t;
  s.source = y_node;
  s.grid = op.grid;
  s.m = m;
  const Eigen::VectorXd w = (-t * res.lambdas.array()).exp().matrix();
  // psi_n^{(j)}(y) for every n, j.
  const Eigen::MatrixXd psi_y = res.vectors.middleRows(y_node * m, m);  // m x k
  s.values = res.vectors * w.asDiagonal() * psi_y.transpose();
  return s;
}

void write_kernel_csv(std::ostream& os, const KernelSlice& s) {
  os.precision(17);
  for (int k = 0; k < s.grid.d; ++k) os << 'x' << k << ',';
  os << "i,j,value\n";
  for (Eigen::Index node = 0; node < s.grid.node_count(); ++node) {
    const Eigen::VectorXd x = s.grid.point(node);
    for (int i = 0; i < s.m; ++i) {
      for (int j = 0; j < s.m; ++j) {
        for (int k = 0; k < s.grid.d; ++k) os << x(k) << ',';
        os << i + 1 << ',' << j + 1 << ',' << s.at(node, i, j) << '\n';
      }
    }
  }
}

std::vector<Eigen::Index> probe_sources(const GridSpec& grid) {
  std::vector<Eigen::Index> out;
  out.push_back(grid.node_at(Eigen::VectorXd::Zero(grid.d)));
  for (int axis = 0; axis < grid.d; ++axis) {
    for (double frac : {0.25, -0.25, 0.5, -0.5}) {
      Eigen::VectorXd y = Eigen::VectorXd::Zero(grid.d);
      // Snap to the nearest node.
      y(axis) = std::round(frac * grid.R / grid.h) * grid.h;
      out.push_back(grid.node_at(y));
    }
  }
  return out;
}

GaussianFit gaussian_fit(const std::vector<KernelSlice>& slices, double floor, double slack) {
  if (slices.empty()) throw std::invalid_argument("gaussian fit needs at least one slice");
  std::vector<double> s_vals, l_vals;
  for (const auto& sl : slices) {
    const double peak = sl.values.cwiseAbs().maxCoeff();
    const Eigen::VectorXd y = sl.y();
    const double shift = 0.5 * sl.grid.d * std::log(sl.t);
    for (Eigen::Index node = 0; node < sl.grid.node_count(); ++node) {
      const double s = (sl.grid.point(node) - y).squaredNorm() / (4.0 * sl.t);
      for (int i = 0; i < sl.m; ++i) {
        for (int j = 0; j < sl.m; ++j) {
          const double k = std::abs(sl.at(node, i, j));
          if (k <= floor * peak || k == 0.0) continue;
          s_vals.push_back(s);
          l_vals.push_back(std::log(k) + shift);
        }
      }
    }
  }
  if (s_vals.size() < 3) throw std::invalid_argument("insufficient kernel data above the noise floor");

  GaussianFit g;
  const LineFit lf = fit_line(s_vals, l_vals);
  g.C2 = -lf.slope;
  g.C1_ls = std::exp(lf.intercept);
  g.rms_residual = lf.rms_residual;
  g.points = lf.points;
  g.s_min = *std::min_element(s_vals.begin(), s_vals.end());
  g.s_max = *std::max_element(s_vals.begin(), s_vals.end());
  g.max_log_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < s_vals.size(); ++k)
    g.max_log_excess = std::max(g.max_log_excess, l_vals[k] - (lf.intercept + lf.slope * s_vals[k]));
  g.C1 = g.C1_ls;
  if (g.max_log_excess > std::log(slack)) {
    // Raise C1 to the tightest envelope with the fitted C2.
    g.C1 = g.C1_ls * std::exp(g.max_log_excess);
    g.envelope_lifted = true;
  }
  g.pass = g.C2 > 0.0 && std::isfinite(g.C1);
  return g;
}

DiaNondiaReport offdiag_vs_diag_check(const KernelSlice& sl, double tol) {
  DiaNondiaReport r;
  const Eigen::VectorXd y = sl.y();
  for (Eigen::Index node = 0; node < sl.grid.node_count(); ++node) {
    for (int i = 0; i < sl.m; ++i) {
      const double kii = sl.at(node, i, i);
      if (kii < r.most_negative_diagonal) r.most_negative_diagonal = kii;
      if (kii < -1e-12) r.negative_diagonal = true;
    }
    for (int i = 0; i < sl.m; ++i) {
      for (int j = 0; j < sl.m; ++j) {
        if (i == j) continue;
        const double kii = std::max(0.0, sl.at(node, i, i));
        const double kjj = std::max(0.0, sl.at(node, j, j));
        const double lhs = std::abs(sl.at(node, i, j) + sl.at(node, j, i));
        const double viol = lhs - 2.0 * std::sqrt(kii * kjj);
        if (viol > r.max_violation) {
          r.max_violation = viol;
          r.witness = KernelWitness{sl.t, sl.grid.point(node), y, i + 1, j + 1, viol};
        }
      }
    }
  }
  if (sl.m == 1) r.max_violation = 0.0;
  r.pass = r.max_violation <= tol && !r.negative_diagonal;
  return r;
}

void merge(DiaNondiaReport& into, const DiaNondiaReport& from, double tol) {
  if (from.max_violation > into.max_violation) {
    into.max_violation = from.max_violation;
    into.witness = from.witness;
  }
  into.most_negative_diagonal = std::min(into.most_negative_diagonal, from.most_negative_diagonal);
  into.negative_diagonal = into.negative_diagonal || from.negative_diagonal;
  into.pass = into.max_violation <= tol && !into.negative_diagonal;
}

PositivityReport positivity_probe(const DiscreteOperator& op, const Propagator& prop, const std::vector<double>& ts,
                                  const std::vector<Eigen::Index>& sources) {
  PositivityReport r;
  if (op.spec) {
    for (Eigen::Index node = 0; node < op.grid.node_count() && r.offdiag_nonnegative; ++node) {
      const Eigen::MatrixXd w = op.spec->vtilde_at(op.grid.point(node));
      for (int i = 0; i < op.m; ++i)
        for (int j = 0; j < op.m; ++j)
          if (i != j && w(i, j) < 0.0) r.offdiag_nonnegative = false;
    }
  } else {
    // Off-diagonal couplings are the negated off-diagonal entries of A.
    for (int col = 0; col < op.A.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(op.A, col); it; ++it)
        if (it.row() / op.m == it.col() / op.m && it.row() != it.col() && it.value() > 0.0)
          r.offdiag_nonnegative = false;
  }
  for (double t : ts) {
    for (Eigen::Index y : sources) {
      const KernelSlice sl = kernel_slice(op, prop, t, y);
      Eigen::Index row = 0, col = 0;
      const double mn = sl.values.minCoeff(&row, &col);
      if (mn < r.min_entry) {
        r.min_entry = mn;
        r.witness = KernelWitness{t, op.grid.point(row / op.m), sl.y(), static_cast<int>(row % op.m) + 1,
                                  static_cast<int>(col) + 1, mn};
      }
    }
  }
  r.negative_found = r.min_entry < -1e-9;
  r.consistent = r.offdiag_nonnegative != r.negative_found;
  return r;
}

LowerBoundReport lower_bound_check(const SystemSpec& spec, const GridSpec& grid, double t, Eigen::Index y_node,
                                   double tol, const PropagatorOptions& popts) {
  if (!spec.symmetric()) throw std::invalid_argument("lower bound needs a symmetric V");
  for (Eigen::Index node = 0; node < grid.node_count(); ++node) {
    const Eigen::VectorXd x = grid.point(node);
    const Eigen::MatrixXd vx = spec.V.eval(x);
    const double sv = spec.v.eval({x.data(), static_cast<std::size_t>(x.size())});
    for (int i = 0; i < spec.m; ++i) {
      if (-vx(i, i) < 0.0 || -vx(i, i) > sv) throw std::invalid_argument("lower bound needs 0 <= -v_ii <= v");
      for (int j = 0; j < spec.m; ++j)
        if (i != j && vx(i, j) < 0.0) throw std::invalid_argument("lower bound needs v_ij >= 0 for i != j");
    }
  }

  const DiscreteOperator sys = assemble(spec, grid);
  const DiscreteOperator scalar = assemble_operator(
      spec.Q, 1,
      [&](const Eigen::VectorXd& x) {
        return Eigen::MatrixXd::Constant(1, 1, -2.0 * spec.v.eval({x.data(), static_cast<std::size_t>(x.size())}));
      },
      grid);
  const Propagator psys(sys.A, popts);
  const Propagator pscal(scalar.A, popts);
  const KernelSlice k = kernel_slice(sys, psys, t, y_node);
  const KernelSlice k2v = kernel_slice(scalar, pscal, t, y_node);

  LowerBoundReport r;
  r.t = t;
  for (Eigen::Index node = 0; node < grid.node_count(); ++node) {
    const double base = k2v.at(node, 0, 0);
    for (int i = 0; i < spec.m; ++i) {
      for (int j = 0; j < spec.m; ++j) {
        const double margin = k.at(node, i, j) - base;
        double& part = i == j ? r.min_margin_diagonal : r.min_margin_offdiagonal;
        part = std::min(part, margin);
        if (margin < r.min_margin) {
          r.min_margin = margin;
          r.witness = KernelWitness{t, grid.point(node), grid.point(y_node), i + 1, j + 1, margin};
        }
      }
    }
  }
  r.pass = r.min_margin >= -tol;
  return r;
}

DecayFit decay_profile_fit(const DiscreteOperator& op, const Propagator& prop, double t, double alpha) {
  if (!(alpha > 2.0)) throw std::invalid_argument("decay profile needs alpha > 2");
  const GridSpec& g = op.grid;
  const int m = op.m;
  DecayFit f;
  f.t = t;
  f.alpha = alpha;
  f.decay_gamma = 1.0 + alpha / 2.0;
  f.decay_beta = alpha / 4.0 + (g.d - 1) / 2.0;

  auto diag_mean = [&](Eigen::Index node) {
    double s = 0.0;
    if (prop.dense()) {
      const Eigen::MatrixXd& e = prop.dense_exp(t);
      for (int i = 0; i < m; ++i) s += e(node * m + i, node * m + i);
    } else {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(op.size());
      for (int i = 0; i < m; ++i) {
        e(node * m + i) = 1.0;
        s += prop.apply(e, t)(node * m + i);
        e(node * m + i) = 0.0;
      }
    }
    return s / (m * g.cell_volume());
  };

  const Eigen::Index center = g.node_at(Eigen::VectorXd::Zero(g.d));
  const double k0 = diag_mean(center);
  std::vector<double> lr, linner, lratio_all, r_all;
  auto idx = g.multi_index(center);
  f.r_min = std::numeric_limits<double>::infinity();
  f.r_max = 0.0;
  for (int step = 1; idx[0] + step < g.interior_per_axis(); ++step) {
    auto p = idx;
    p[0] += step;
    const double r = step * g.h;
    if (r < 1.0 || r > 0.8 * g.R) continue;
    const double ratio = diag_mean(g.node_of(p)) / k0;
    if (!(ratio > 1e-13)) continue;
    const double inner = -std::log(ratio);
    if (inner < 1.0 || inner > 25.0) continue;
    lr.push_back(std::log(r));
    linner.push_back(std::log(inner));
    r_all.push_back(r);
    lratio_all.push_back(std::log(ratio));
    f.r_min = std::min(f.r_min, r);
    f.r_max = std::max(f.r_max, r);
  }
  f.points = static_cast<int>(lr.size());
  if (f.points < 3) throw std::runtime_error("decay fit window is empty; adjust t or R");
  f.gamma_hat = fit_line(lr, linner).slope;

  // ln ratio ~ c0 + c1 ln r + c2 r^gamma_hat; the ln r coefficient is -2 beta.
  Eigen::MatrixXd design(f.points, 3);
  Eigen::VectorXd rhs(f.points);
  for (int k = 0; k < f.points; ++k) {
    design(k, 0) = 1.0;
    design(k, 1) = std::log(r_all[static_cast<std::size_t>(k)]);
    design(k, 2) = std::pow(r_all[static_cast<std::size_t>(k)], f.gamma_hat);
    rhs(k) = lratio_all[static_cast<std::size_t>(k)];
  }
  const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(rhs);
  f.beta_hat = -0.5 * coef(1);
  f.pass = std::abs(f.gamma_hat - f.decay_gamma) <= 0.1 * f.decay_gamma;
  return f;
}

}  // namespace msv
