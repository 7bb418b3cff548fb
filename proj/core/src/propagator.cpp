#include "msv/propagator.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <stdexcept>

namespace msv {

Propagator::Propagator(Eigen::SparseMatrix<double> a, PropagatorOptions opts)
    : a_(std::move(a)), opts_(opts), dense_(a_.rows() <= opts.dense_limit) {
  Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(a_.rows());
  for (int col = 0; col < a_.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(a_, col); it; ++it) row_sums(it.row()) += std::abs(it.value());
  norm_inf_ = row_sums.size() ? row_sums.maxCoeff() : 0.0;
}

const Eigen::MatrixXd& Propagator::dense_exp(double t) const {
  if (!dense_) throw std::logic_error("dense exponential requested on the Krylov path");
  std::lock_guard lock(mu_);
  auto it = cache_.find(t);
  if (it == cache_.end()) {
    const Eigen::MatrixXd m = (-t) * Eigen::MatrixXd(a_);
    it = cache_.emplace(t, std::make_shared<const Eigen::MatrixXd>(m.exp())).first;
  }
  return *it->second;
}

Eigen::VectorXd Propagator::apply(const Eigen::VectorXd& f, double t) const {
  if (t < 0.0) throw std::invalid_argument("propagation time must be nonnegative");
  if (t == 0.0) return f;
  if (dense_) return dense_exp(t) * f;
  return krylov(f, t);
}

Eigen::MatrixXd Propagator::apply(const Eigen::MatrixXd& f, double t) const {
  if (t < 0.0) throw std::invalid_argument("propagation time must be nonnegative");
  if (t == 0.0) return f;
  if (dense_) return dense_exp(t) * f;
  Eigen::MatrixXd out(f.rows(), f.cols());
  for (Eigen::Index c = 0; c < f.cols(); ++c) out.col(c) = krylov(f.col(c), t);
  return out;
}

double Propagator::trace(double t) const {
  if (dense_) return dense_exp(t).trace();
  double s = 0.0;
  Eigen::VectorXd e = Eigen::VectorXd::Zero(size());
  for (Eigen::Index k = 0; k < size(); ++k) {
    e(k) = 1.0;
    s += krylov(e, t)(k);
    e(k) = 0.0;
  }
  return s;
}

// Arnoldi approximation with adaptive substeps. The local error estimate is
// beta * h_{m+1,m} * tau * |e_m^T phi_1(-tau H) e_1|, read off the exponential
// of the augmented matrix [[-tau H, e_1], [0, 0]].
Eigen::VectorXd Propagator::krylov(const Eigen::VectorXd& f, double t) const {
  const Eigen::Index n = size();
  const int mmax = static_cast<int>(std::min<Eigen::Index>(opts_.krylov_dim, n));
  const double fnorm = f.norm();
  if (fnorm == 0.0) return f;

  Eigen::VectorXd w = f;
  double t_done = 0.0;
  double tau = std::min(t, 10.0 / std::max(norm_inf_, 1e-300) * mmax);
  int steps = 0;
  Eigen::MatrixXd v(n, mmax + 1);
  Eigen::MatrixXd hmat(mmax + 1, mmax);

  while (t_done < t) {
    if (++steps > opts_.max_steps) throw std::runtime_error("Krylov propagation did not converge within the step cap");
    const double beta = w.norm();
    if (beta == 0.0) return w;
    v.col(0) = w / beta;
    hmat.setZero();
    int mdim = mmax;
    bool breakdown = false;
    for (int j = 0; j < mmax; ++j) {
      Eigen::VectorXd p = -(a_ * v.col(j));
      for (int i = 0; i <= j; ++i) {
        hmat(i, j) = v.col(i).dot(p);
        p -= hmat(i, j) * v.col(i);
      }
      for (int i = 0; i <= j; ++i) {  // second Gram-Schmidt pass
        const double c = v.col(i).dot(p);
        hmat(i, j) += c;
        p -= c * v.col(i);
      }
      const double hn = p.norm();
      if (hn <= 1e-12 * std::max(1.0, norm_inf_)) {
        mdim = j + 1;
        breakdown = true;
        break;
      }
      hmat(j + 1, j) = hn;
      v.col(j + 1) = p / hn;
    }
    const double h_next = breakdown ? 0.0 : hmat(mdim, mdim - 1);

    tau = std::min(tau, t - t_done);
    for (;;) {
      Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(mdim + 1, mdim + 1);
      aug.topLeftCorner(mdim, mdim) = tau * hmat.topLeftCorner(mdim, mdim);
      aug(0, mdim) = 1.0;
      const Eigen::MatrixXd e = aug.exp();
      const double err = breakdown ? 0.0 : beta * h_next * tau * std::abs(e(mdim - 1, mdim));
      const double allowed = opts_.tol * fnorm * tau / t;
      if (err <= allowed || tau < 1e-14 * t) {
        w = beta * (v.leftCols(mdim) * e.col(0).head(mdim));
        t_done += tau;
        if (!breakdown && err > 0.0) tau *= std::min(2.0, 0.9 * std::pow(allowed / err, 1.0 / (mdim + 1)));
        else tau *= 2.0;
        break;
      }
      tau *= 0.5;
    }
  }
  return w;
}

}  // namespace msv
