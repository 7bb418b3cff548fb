#include "msv/matrix_functions.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <stdexcept>

namespace msv {

bool is_numerically_symmetric(const Eigen::MatrixXd& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

double min_real_eigenvalue(const Eigen::MatrixXd& m) {
  if (is_numerically_symmetric(m)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  return es.eigenvalues().real().minCoeff();
}

Eigen::MatrixXd symmetric_power(const Eigen::MatrixXd& m, double p) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  const Eigen::VectorXd& lam = es.eigenvalues();
  if (lam.minCoeff() <= 0.0) throw std::domain_error("fractional power needs a positive definite matrix");
  const Eigen::VectorXd powered = lam.array().pow(p).matrix();
  return es.eigenvectors() * powered.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXcd principal_power(const Eigen::MatrixXd& m, double p) {
  if (is_numerically_symmetric(m)) return symmetric_power(m, p).cast<std::complex<double>>();
  if (min_real_eigenvalue(m) <= 0.0) throw std::domain_error("fractional power needs spectrum in the open right half-plane");
  const Eigen::MatrixXcd mc = m.cast<std::complex<double>>();
  Eigen::MatrixPower<Eigen::MatrixXcd> mp(mc);
  return mp(p);
}

}  // namespace msv
