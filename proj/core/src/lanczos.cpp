#include "msv/spectral.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace msv {

namespace {

double gershgorin_lower(const Eigen::SparseMatrix<double>& a) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(a.rows());
  Eigen::VectorXd off = Eigen::VectorXd::Zero(a.rows());
  for (int col = 0; col < a.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, col); it; ++it) {
      if (it.row() == it.col()) diag(it.row()) += it.value();
      else off(it.row()) += std::abs(it.value());
    }
  }
  return (diag - off).minCoeff();
}

}  // namespace

SpectralResult lanczos_lowest(const Eigen::SparseMatrix<double>& a, int k, const EigenOptions& opts) {
  const Eigen::Index n = a.rows();
  if (k < 1 || k >= n) throw std::invalid_argument("lanczos needs 1 <= k < n");
  const Eigen::Index cap =
      opts.max_basis > 0 ? std::min<Eigen::Index>(opts.max_basis, n) : std::min<Eigen::Index>(n, std::max(3 * k, k + 120));

  const double sigma = std::min(0.0, gershgorin_lower(a) - 1.0);
  Eigen::SparseMatrix<double> shifted = a;
  if (sigma != 0.0) {
    Eigen::SparseMatrix<double> id(n, n);
    id.setIdentity();
    shifted = a - sigma * id;
  }
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(shifted);
  if (solver.info() != Eigen::Success) throw std::runtime_error("factorization of the shifted operator failed");

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  auto random_unit = [&](Eigen::Index cols_used, const Eigen::MatrixXd& basis) {
    Eigen::VectorXd q(n);
    for (Eigen::Index i = 0; i < n; ++i) q(i) = normal(rng);
    for (int pass = 0; pass < 2; ++pass)
      q -= basis.leftCols(cols_used) * (basis.leftCols(cols_used).transpose() * q);
    return Eigen::VectorXd(q.normalized());
  };

  Eigen::MatrixXd basis(n, cap);
  std::vector<double> alpha, beta;
  basis.col(0) = random_unit(0, basis);

  auto try_extract = [&](Eigen::Index steps, SpectralResult& out) -> bool {
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(steps, steps);
    for (Eigen::Index i = 0; i < steps; ++i) {
      t(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < steps) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    const double b_last = beta[static_cast<std::size_t>(steps - 1)];
    // Largest theta first <=> smallest lambda first.
    for (int j = 0; j < k; ++j) {
      const Eigen::Index col = steps - 1 - j;
      const double theta = es.eigenvalues()(col);
      if (theta <= 0.0) return false;
      const double lam = sigma + 1.0 / theta;
      const double est = std::pow(lam - sigma, 2) * std::abs(b_last * es.eigenvectors()(steps - 1, col));
      if (est > opts.tol * std::max(1.0, std::abs(lam))) return false;
    }
    out.lambdas.resize(k);
    out.vectors.resize(n, k);
    for (int j = 0; j < k; ++j) {
      const Eigen::Index col = steps - 1 - j;
      out.lambdas(j) = sigma + 1.0 / es.eigenvalues()(col);
      out.vectors.col(j) = (basis.leftCols(steps) * es.eigenvectors().col(col)).normalized();
    }
    for (int j = 0; j < k; ++j) {
      const Eigen::VectorXd r = a * out.vectors.col(j) - out.lambdas(j) * out.vectors.col(j);
      if (r.norm() > opts.tol * std::max(1.0, std::abs(out.lambdas(j)))) return false;
    }
    out.method = "lanczos";
    return true;
  };

  SpectralResult out;
  for (Eigen::Index j = 0; j < cap; ++j) {
    Eigen::VectorXd w = solver.solve(basis.col(j));
    const double aj = basis.col(j).dot(w);
    alpha.push_back(aj);
    for (int pass = 0; pass < 2; ++pass)
      w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).transpose() * w);
    double bj = w.norm();
    const bool check = j + 1 >= k && ((j + 1 - k) % 20 == 0 || j + 1 == cap);
    if (bj <= 1e-13 * std::abs(aj)) {
      // Invariant subspace: continue with a fresh orthogonal direction.
      bj = 0.0;
      beta.push_back(0.0);
      if (j + 1 >= k && try_extract(j + 1, out)) return out;
      if (j + 1 < cap) basis.col(j + 1) = random_unit(j + 1, basis);
      continue;
    }
    beta.push_back(bj);
    if (check && try_extract(j + 1, out)) return out;
    if (j + 1 < cap) basis.col(j + 1) = w / bj;
  }
  throw std::runtime_error("Lanczos did not converge within the basis cap");
}

}  // namespace msv
