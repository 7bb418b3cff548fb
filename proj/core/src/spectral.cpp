#include "msv/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace msv {

SpectralResult eigen_lowest(const DiscreteOperator& op, int k, const EigenOptions& opts) {
  if (!op.symmetric) throw std::invalid_argument("eigen_lowest needs a symmetric operator");
  const Eigen::Index n = op.size();
  if (k < 1 || k > n) throw std::invalid_argument("k must be in [1, matrix size]");

  SpectralResult res;
  if (n <= opts.dense_limit) {
    const Eigen::MatrixXd dense(op.A);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
    if (es.info() != Eigen::Success) throw std::runtime_error("dense eigensolver failed");
    res.lambdas = es.eigenvalues().head(k);
    res.vectors = es.eigenvectors().leftCols(k);
    res.method = "dense";
  } else {
    if (k == n) throw std::invalid_argument("full spectrum requires the dense path");
    res = lanczos_lowest(op.A, k, opts);
  }
  res.k = k;
  res.n_total = n;
  res.residuals.resize(k);
  for (int j = 0; j < k; ++j) {
    const Eigen::VectorXd r = op.A * res.vectors.col(j) - res.lambdas(j) * res.vectors.col(j);
    res.residuals(j) = r.norm() / res.vectors.col(j).norm();
  }
  res.vectors /= std::sqrt(op.grid.cell_volume());
  return res;
}

int counting_function(const SpectralResult& res, double lam) {
  if (res.lambdas.size() == 0 || lam > res.lambdas(res.lambdas.size() - 1))
    throw std::out_of_range("lambda beyond the computed spectrum");
  const auto* begin = res.lambdas.data();
  return static_cast<int>(std::upper_bound(begin, begin + res.lambdas.size(), lam) - begin);
}

double weyl_exponent(double alpha, int d) { return d * (0.5 + 1.0 / alpha); }

double weyl_constant(double alpha, int d, int m) {
  const double dd = d;
  const double ball = std::pow(std::numbers::pi, dd / 2.0) / std::tgamma(dd / 2.0 + 1.0);
  return (1.0 / alpha) * m * dd * ball / std::pow(4.0 * std::numbers::pi, dd / 2.0) * std::tgamma(dd / alpha) /
         std::tgamma(weyl_exponent(alpha, d) + 1.0);
}

WeylReport weyl_fit(const SpectralResult& res, double alpha, int d, int m) {
  if (res.k < 40) throw std::invalid_argument("Weyl fit needs at least 40 eigenvalues");
  WeylReport w;
  w.alpha = alpha;
  w.d = d;
  w.m = m;
  w.exponent = weyl_exponent(alpha, d);
  w.theory = weyl_constant(alpha, d, m);
  for (int n = res.k / 2; n < res.k; ++n) {
    const double lam = res.lambdas(n);
    if (lam <= 0.0) continue;
    const int c = counting_function(res, lam);
    w.lambda.push_back(lam);
    w.count.push_back(c);
    w.ratio.push_back(c / std::pow(lam, w.exponent));
  }
  if (w.ratio.empty()) throw std::invalid_argument("no positive eigenvalues in the top half");
  std::vector<double> tail(w.ratio.end() - static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, w.ratio.size() / 4)),
                           w.ratio.end());
  std::sort(tail.begin(), tail.end());
  const std::size_t mid = tail.size() / 2;
  w.tail = tail.size() % 2 ? tail[mid] : 0.5 * (tail[mid - 1] + tail[mid]);
  w.rel_deviation = (w.tail - w.theory) / w.theory;
  return w;
}

TraceReport trace_check(const SpectralResult& res, const Propagator& prop, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("trace check needs t > 0");
  TraceReport r;
  r.t = t;
  for (int n = 0; n < res.k; ++n) r.spectral_sum += std::exp(-res.lambdas(n) * t);
  r.kernel_trace = prop.trace(t);
  r.abs_gap = std::abs(r.kernel_trace - r.spectral_sum);
  r.rel_gap = r.abs_gap / std::abs(r.kernel_trace);
  r.truncation_bound = static_cast<double>(res.n_total - res.k) * std::exp(-res.lambdas(res.k - 1) * t);
  r.inconclusive = r.truncation_bound > 0.1 * r.spectral_sum;
  return r;
}

}  // namespace msv
