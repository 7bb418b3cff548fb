#pragma once

// Matrix heat kernel slices K(t, ., y) and the pointwise kernel estimates
// checked on them.

#include "msv/grid.hpp"
#include "msv/propagator.hpp"
#include "msv/spectral.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace msv {

struct KernelSlice {
  double t = 0.0;
  Eigen::Index source = 0;  // node index of y
  GridSpec grid;
  int m = 1;
  // Row node * m + i, column j holds k_ij(t, x_node, y).
  Eigen::MatrixXd values;

  double at(Eigen::Index node, int i, int j) const { return values(node * m + i, j); }
  Eigen::VectorXd y() const { return grid.point(source); }
};

/// Column j is exp(-tA) applied to the delta at (y, e_j) scaled by 1/h^d.
KernelSlice kernel_slice(const DiscreteOperator& op, const Propagator& prop, double t, Eigen::Index y_node);

/// Kernel slice rebuilt from eigenpairs: sum_n exp(-lambda_n t) psi_n(x) psi_n(y)^T.
KernelSlice kernel_from_eigenpairs(const SpectralResult& res, const DiscreteOperator& op, double t,
                                   Eigen::Index y_node);

/// Writes "x0,...,i,j,value" rows (1-based i, j).
void write_kernel_csv(std::ostream& os, const KernelSlice& s);

/// Center node plus the nodes at +-R/4 and +-R/2 along every axis.
std::vector<Eigen::Index> probe_sources(const GridSpec& grid);

struct GaussianFit {
  double C1 = 0.0;     // envelope constant actually reported
  double C2 = 0.0;
  double C1_ls = 0.0;  // exp(intercept) of the least-squares line
  double rms_residual = 0.0;
  int points = 0;
  double s_min = 0.0;  // window in s = |x - y|^2 / (4t)
  double s_max = 0.0;
  double max_log_excess = 0.0;  // max ln(|k| / (C1_ls t^{-d/2} e^{-C2 s}))
  bool envelope_lifted = false;
  bool pass = false;
};

/// Fits ln|k_ij| + (d/2) ln t against s = |x - y|^2 / (4t) over all slices,
/// using entries above floor * (largest entry of their slice).
GaussianFit gaussian_fit(const std::vector<KernelSlice>& slices, double floor = 1e-13, double slack = 1.05);

struct KernelWitness {
  double t = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  int i = 0;  // 1-based
  int j = 0;
  double value = 0.0;
};

struct DiaNondiaReport {
  double max_violation = -std::numeric_limits<double>::infinity();
  double most_negative_diagonal = std::numeric_limits<double>::infinity();
  bool negative_diagonal = false;  // a diagonal entry below -1e-12
  std::optional<KernelWitness> witness;
  bool pass = false;
};

/// max over x, i != j of |k_ij(t,x,y) + k_ij(t,y,x)| - 2 sqrt(k_ii(t,x,y) k_jj(t,x,y)),
/// using k_ij(t,y,x) = k_ji(t,x,y) for symmetric systems.
DiaNondiaReport offdiag_vs_diag_check(const KernelSlice& slice, double tol = 1e-9);
void merge(DiaNondiaReport& into, const DiaNondiaReport& from, double tol = 1e-9);

struct PositivityReport {
  double min_entry = std::numeric_limits<double>::infinity();
  KernelWitness witness;
  bool offdiag_nonnegative = true;  // sign check on Vt at the grid nodes
  bool negative_found = false;      // min_entry < -1e-9
  bool consistent = true;           // outcome agrees with the sign of the off-diagonals
};

PositivityReport positivity_probe(const DiscreteOperator& op, const Propagator& prop, const std::vector<double>& ts,
                                  const std::vector<Eigen::Index>& sources);

struct LowerBoundReport {
  double t = 0.0;
  double min_margin = std::numeric_limits<double>::infinity();  // min (k_ij - k_2v)
  double min_margin_diagonal = std::numeric_limits<double>::infinity();
  double min_margin_offdiagonal = std::numeric_limits<double>::infinity();
  KernelWitness witness;  // value = k_ij - k_2v at the minimum
  bool pass = false;
};

/// Checks k_2v(t, x, y) <= k_ij(t, x, y) + tol with k_2v the kernel of
/// div(Q grad .) - 2v. Throws std::invalid_argument when the system violates
/// the preconditions (symmetric V, v_ij >= 0 for i != j, 0 <= -v_ii <= v).
LowerBoundReport lower_bound_check(const SystemSpec& spec, const GridSpec& grid, double t, Eigen::Index y_node,
                                   double tol = 1e-9, const PropagatorOptions& popts = {});

struct DecayFit {
  double t = 0.0;
  double alpha = 0.0;
  double gamma_hat = 0.0;
  double beta_hat = 0.0;
  double decay_gamma = 0.0;  // 1 + alpha / 2
  double decay_beta = 0.0;   // alpha / 4 + (d - 1) / 2
  double r_min = 0.0;        // window actually used
  double r_max = 0.0;
  int points = 0;
  bool pass = false;
};

/// Fits the slope of ln(-ln(k(t,x,x) / k(t,0,0))) against ln|x| along the
/// first axis, with k the mean diagonal entry. Needs alpha > 2.
DecayFit decay_profile_fit(const DiscreteOperator& op, const Propagator& prop, double t, double alpha);

}  // namespace msv
