#pragma once

// Log-radial sample sets used by the hypothesis checkers: radii r0 * 2^k
// times quasi-random unit directions, plus the origin.

#include <Eigen/Dense>
#include <vector>

namespace msv {

struct SampleSpec {
  double r0 = 0.25;
  int levels = 15;      // k = 0 .. levels-1
  int directions = 64;  // per radius when d > 1; d == 1 always uses {+1, -1}
  bool include_origin = true;
  // Radius of the ball around 0 skipped by gradient-based checks when the
  // expression carries the origin-singular flag.
  double origin_ball = 0.125;
};

struct Shell {
  double radius = 0.0;
  std::vector<Eigen::VectorXd> points;
};

struct SampleSet {
  SampleSpec spec;
  int dim = 1;
  std::vector<Shell> shells;  // ascending radius; shells[0] is the origin when included
};

SampleSet make_samples(int dim, const SampleSpec& spec = {});

/// Deterministic quasi-random unit vectors in R^n (Halton + Box-Muller).
std::vector<Eigen::VectorXd> quasi_random_directions(int n, int count, int skip = 1);

}  // namespace msv
