#include "msv/sampling.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace msv {

namespace {

double radical_inverse(int index, int base) {
  double f = 1.0;
  double r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * (index % base);
    index /= base;
  }
  return r;
}

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71};

}  // namespace

std::vector<Eigen::VectorXd> quasi_random_directions(int n, int count, int skip) {
  if (n < 1) throw std::invalid_argument("direction dimension must be >= 1");
  const int pairs = (n + 1) / 2;
  if (2 * pairs > static_cast<int>(std::size(kPrimes))) throw std::invalid_argument("dimension too large for Halton directions");
  std::vector<Eigen::VectorXd> dirs;
  dirs.reserve(static_cast<std::size_t>(count));
  if (n == 2) {
    for (int k = 0; k < count; ++k) {
      const double th = 2.0 * std::numbers::pi * (k + 0.5) / count;
      dirs.emplace_back(Eigen::Vector2d(std::cos(th), std::sin(th)));
    }
    return dirs;
  }
  for (int k = 0, idx = skip; k < count; ++idx) {
    Eigen::VectorXd g(2 * pairs);
    for (int p = 0; p < pairs; ++p) {
      const double u1 = radical_inverse(idx, kPrimes[2 * p]);
      const double u2 = radical_inverse(idx, kPrimes[2 * p + 1]);
      if (u1 <= 0.0) continue;
      const double rad = std::sqrt(-2.0 * std::log(u1));
      g(2 * p) = rad * std::cos(2.0 * std::numbers::pi * u2);
      g(2 * p + 1) = rad * std::sin(2.0 * std::numbers::pi * u2);
    }
    Eigen::VectorXd v = g.head(n);
    const double nrm = v.norm();
    if (!(nrm > 1e-8) || !std::isfinite(nrm)) continue;
    dirs.emplace_back(v / nrm);
    ++k;
  }
  return dirs;
}

SampleSet make_samples(int dim, const SampleSpec& spec) {
  if (dim < 1) throw std::invalid_argument("sample dimension must be >= 1");
  if (!(spec.r0 > 0.0) || spec.levels < 1) throw std::invalid_argument("invalid sampling spec");
  SampleSet set;
  set.spec = spec;
  set.dim = dim;

  std::vector<Eigen::VectorXd> dirs;
  if (dim == 1) {
    dirs = {Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, -1.0)};
  } else {
    dirs = quasi_random_directions(dim, spec.directions);
  }

  if (spec.include_origin) set.shells.push_back(Shell{0.0, {Eigen::VectorXd::Zero(dim)}});
  for (int k = 0; k < spec.levels; ++k) {
    Shell s;
    s.radius = spec.r0 * std::ldexp(1.0, k);
    s.points.reserve(dirs.size());
    for (const auto& d : dirs) s.points.push_back(s.radius * d);
    set.shells.push_back(std::move(s));
  }
  return set;
}

}  // namespace msv
