#include "msv/fit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace msv {

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_line: size mismatch");
  const auto n = static_cast<double>(x.size());
  if (x.size() < 2) throw std::invalid_argument("fit_line: need at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  if (sxx <= 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double r = y[k] - (f.slope * x[k] + f.intercept);
    ss += r * r;
  }
  f.rms_residual = std::sqrt(ss / n);
  f.points = static_cast<int>(x.size());
  return f;
}

std::size_t top_decade_begin(std::span<const double> radius) {
  if (radius.empty()) return 0;
  const double rmax = *std::max_element(radius.begin(), radius.end());
  std::size_t k = 0;
  while (k < radius.size() && radius[k] < rmax / 10.0) ++k;
  return k;
}

double top_decade_slope(std::span<const double> radius, std::span<const double> value) {
  std::vector<double> lx, ly;
  for (std::size_t k = top_decade_begin(radius); k < radius.size(); ++k) {
    if (radius[k] > 0.0 && value[k] > 0.0 && std::isfinite(value[k])) {
      lx.push_back(std::log(radius[k]));
      ly.push_back(std::log(value[k]));
    }
  }
  if (lx.size() < 2) return 0.0;
  return fit_line(lx, ly).slope;
}

}  // namespace msv
