#pragma once

// Seeded random smooth test functions: sums of C-infinity bumps
// a * exp(-1 / (1 - |x - c|^2 / w^2)) supported in |x - c| < w. The field is
// defined on R^d independently of any grid, so the same seed yields the same
// function under refinement.

#include "msv/grid.hpp"

#include <cstdint>

namespace msv {

struct BumpField {
  int d = 1;
  int m = 1;
  std::vector<Eigen::VectorXd> centers;
  std::vector<double> widths;
  std::vector<Eigen::VectorXd> amplitudes;  // m components each

  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const;
};

/// Centers uniform in [-R/2, R/2]^d, widths in [0.5, 2], amplitudes in [-1, 1].
BumpField random_bump_field(int d, int m, double R, std::uint64_t seed, int bumps = 4);

Eigen::VectorXd sample_field(const BumpField& f, const GridSpec& grid);

}  // namespace msv
