#pragma once

// Norm estimates of the discrete semigroup exp(-tA): contraction on L^p,
// L^1 -> L^infinity smoothing, Lie-Trotter splitting, and the maximal
// inequality ratio.

#include "msv/grid.hpp"
#include "msv/propagator.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace msv {

struct ContractionRow {
  double t;
  double p;
  int trial;
  std::uint64_t seed;
  double ratio;  // ||exp(-tA) f||_p / ||f||_p
};

struct ContractionReport {
  std::vector<ContractionRow> rows;
  double max_ratio = 0.0;
  ContractionRow worst{};
  bool pass = false;  // max_ratio <= 1 + 1e-6
};

/// p = infinity is passed as std::numeric_limits<double>::infinity().
ContractionReport contraction_check(const DiscreteOperator& op, const Propagator& prop,
                                    const std::vector<double>& t_grid, const std::vector<double>& p_grid, int trials,
                                    std::uint64_t seed);

struct UltracontractivityReport {
  std::vector<double> t;
  std::vector<double> m_tilde;  // t^{d/2} max_{i,j,x,y} |k_ij(t,x,y)|
  double spread = 0.0;          // max / min
  bool pass = false;            // spread <= 10
};

UltracontractivityReport lp_lq_check(const DiscreteOperator& op, const Propagator& prop,
                                     const std::vector<double>& t_grid, const std::vector<Eigen::Index>& sources);

struct TrotterReport {
  double t = 0.0;
  std::vector<int> n;
  std::vector<double> deviation;  // ||Pi_n f - exp(-tA) f||_2 (euclidean)
  double slope = 0.0;
  bool exact = false;  // every deviation below 1e-12 ||f||
  bool pass = false;   // exact or slope <= -0.8
};

/// Pi_n = (exp(-tv/n) exp(-(t/n) A_V))^n applied to f, compared with
/// exp(-tA) f where A = A_V + diag(v).
TrotterReport trotter_kato_check(const DiscreteOperator& a_v, const Eigen::VectorXd& v_nodes, double t,
                                 const std::vector<int>& n_grid, const Eigen::VectorXd& f,
                                 const PropagatorOptions& popts = {});

/// Diagonal of v at every unknown (repeated over components).
Eigen::VectorXd scalar_on_unknowns(const PotentialExpr& v, const GridSpec& grid, int m);

struct MaximalReport {
  double p = 2.0;
  double c_hat = 0.0;
  double c_hat_refined = 0.0;
  double stability_ratio = 0.0;  // max / min of the two estimates
  int skipped = 0;               // draws with a degenerate denominator
  bool pass = false;             // c_hat >= 1 and stability_ratio <= 1.5
};

/// max over draws of (||A_diff u||_p + ||A_pot u||_p) / ||(A_diff + A_pot) u||_p.
double maximal_ratio(const Eigen::SparseMatrix<double>& a_diff, const Eigen::SparseMatrix<double>& a_pot,
                     const std::vector<Eigen::VectorXd>& draws, int m, double p, const GridSpec& grid, int* skipped);

/// Runs maximal_ratio on the system grid and on its refinement N -> 2N - 1
/// with the same smooth draws.
MaximalReport maximal_inequality_probe(const SystemSpec& spec, const GridSpec& grid, double p, int trials,
                                       std::uint64_t seed);

}  // namespace msv
