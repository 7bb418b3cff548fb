#include "msv/smooth_fields.hpp"

#include <cmath>
#include <random>

namespace msv {

Eigen::VectorXd BumpField::operator()(const Eigen::VectorXd& x) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m);
  for (std::size_t b = 0; b < centers.size(); ++b) {
    const double q = (x - centers[b]).squaredNorm() / (widths[b] * widths[b]);
    if (q < 1.0) out += amplitudes[b] * std::exp(-1.0 / (1.0 - q));
  }
  return out;
}

BumpField random_bump_field(int d, int m, double R, std::uint64_t seed, int bumps) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> center(-0.5 * R, 0.5 * R);
  std::uniform_real_distribution<double> width(0.5, 2.0);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  BumpField f;
  f.d = d;
  f.m = m;
  for (int b = 0; b < bumps; ++b) {
    Eigen::VectorXd c(d), a(m);
    for (int k = 0; k < d; ++k) c(k) = center(rng);
    f.centers.push_back(c);
    f.widths.push_back(width(rng));
    for (int k = 0; k < m; ++k) a(k) = amp(rng);
    f.amplitudes.push_back(a);
  }
  return f;
}

Eigen::VectorXd sample_field(const BumpField& f, const GridSpec& grid) {
  return sample(grid, f.m, [&](const Eigen::VectorXd& x) { return f(x); });
}

}  // namespace msv
