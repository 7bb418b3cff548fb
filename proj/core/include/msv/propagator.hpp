#pragma once

// Action of exp(-tA) for a sparse operator A.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <map>
#include <memory>
#include <mutex>

namespace msv {

struct PropagatorOptions {
  Eigen::Index dense_limit = 2048;  // dense Pade scaling-and-squaring up to this size
  double tol = 1e-8;                // relative accuracy target of the Krylov path
  int krylov_dim = 30;
  int max_steps = 200000;
};

class Propagator {
 public:
  explicit Propagator(Eigen::SparseMatrix<double> a, PropagatorOptions opts = {});

  bool dense() const noexcept { return dense_; }
  Eigen::Index size() const noexcept { return a_.rows(); }

  /// exp(-tA) f. t = 0 returns f unchanged.
  Eigen::VectorXd apply(const Eigen::VectorXd& f, double t) const;
  /// Column-wise exp(-tA) F.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& f, double t) const;

  /// trace exp(-tA).
  double trace(double t) const;

  /// Dense exp(-tA); only available on the dense path.
  const Eigen::MatrixXd& dense_exp(double t) const;

 private:
  Eigen::VectorXd krylov(const Eigen::VectorXd& f, double t) const;

  Eigen::SparseMatrix<double> a_;
  PropagatorOptions opts_;
  bool dense_ = false;
  double norm_inf_ = 0.0;
  mutable std::mutex mu_;
  mutable std::map<double, std::shared_ptr<const Eigen::MatrixXd>> cache_;
};

}  // namespace msv
