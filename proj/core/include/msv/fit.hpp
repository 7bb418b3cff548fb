#pragma once

#include <span>

namespace msv {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
  int points = 0;
};

/// Ordinary least squares y ~ slope * x + intercept. Needs >= 2 distinct x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Slope of log(value) against log(radius) over radii >= r_max / 10, skipping
/// nonpositive or non-finite entries. Returns 0 when fewer than two points
/// qualify.
double top_decade_slope(std::span<const double> radius, std::span<const double> value);

/// Index of the first radius in the top decade (radius >= r_max / 10).
std::size_t top_decade_begin(std::span<const double> radius);

}  // namespace msv
