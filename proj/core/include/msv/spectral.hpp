#pragma once

// Low spectrum of a symmetric discrete operator, eigenvalue counting, the
// Weyl constant, and the semigroup trace identity.

#include "msv/grid.hpp"
#include "msv/propagator.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace msv {

struct SpectralResult {
  Eigen::VectorXd lambdas;  // ascending
  Eigen::MatrixXd vectors;  // columns normalized in the discrete L2 norm
  Eigen::VectorXd residuals;  // ||A psi - lambda psi||_2 / ||psi||_2
  int k = 0;
  Eigen::Index n_total = 0;  // matrix size
  std::string method;
};

struct EigenOptions {
  Eigen::Index dense_limit = 4096;
  std::uint64_t seed = 0x5eed;
  double tol = 1e-8;
  int max_basis = 0;  // 0 picks min(n, max(3k, k + 120))
};

/// k smallest eigenpairs. k == n is accepted on the dense path only.
SpectralResult eigen_lowest(const DiscreteOperator& op, int k, const EigenOptions& opts = {});

/// Shift-invert Lanczos with full reorthogonalization on a symmetric matrix.
/// Returns the k smallest eigenpairs with euclidean-normalized vectors.
SpectralResult lanczos_lowest(const Eigen::SparseMatrix<double>& a, int k, const EigenOptions& opts);

/// #{n : lambda_n <= lam}; throws std::out_of_range when lam exceeds the
/// largest computed eigenvalue.
int counting_function(const SpectralResult& res, double lam);

double weyl_exponent(double alpha, int d);
double weyl_constant(double alpha, int d, int m);

struct WeylReport {
  double alpha = 0.0;
  int d = 1;
  int m = 1;
  double exponent = 0.0;
  double theory = 0.0;
  std::vector<double> lambda;
  std::vector<int> count;
  std::vector<double> ratio;
  double tail = 0.0;
  double rel_deviation = 0.0;
};

WeylReport weyl_fit(const SpectralResult& res, double alpha, int d, int m);

struct TraceReport {
  double t = 0.0;
  double spectral_sum = 0.0;
  double kernel_trace = 0.0;
  double abs_gap = 0.0;
  double rel_gap = 0.0;
  double truncation_bound = 0.0;
  bool inconclusive = false;
};

/// Compares sum_n exp(-lambda_n t) with h^d sum_x sum_i k_ii(t, x, x).
TraceReport trace_check(const SpectralResult& res, const Propagator& prop, double t);

}  // namespace msv
