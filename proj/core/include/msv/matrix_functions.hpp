#pragma once

#include <Eigen/Dense>

namespace msv {

/// True when ||M - M^T||_max <= tol * max(1, ||M||_max).
bool is_numerically_symmetric(const Eigen::MatrixXd& m, double tol = 1e-10);

/// Principal power M^p of a real matrix whose spectrum lies in the open right
/// half-plane. Symmetric input goes through an eigendecomposition; anything
/// else through a complex Schur based matrix function. Throws
/// std::domain_error when some eigenvalue has nonpositive real part.
Eigen::MatrixXcd principal_power(const Eigen::MatrixXd& m, double p);

/// Same as principal_power, restricted to symmetric positive definite input.
Eigen::MatrixXd symmetric_power(const Eigen::MatrixXd& m, double p);

/// Smallest real part over the spectrum.
double min_real_eigenvalue(const Eigen::MatrixXd& m);

}  // namespace msv
