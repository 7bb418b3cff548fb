#pragma once

// Box truncation [-R, R]^d with N points per axis and a conservative
// finite-difference discretization of -div(Q grad .) - W. Dirichlet boundary
// nodes are eliminated, so unknowns live on the (N-2)^d interior nodes.
//
// Unknown layout: index = node * m + component, node index with axis 0
// varying fastest.

#include "msv/model.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <functional>
#include <iosfwd>
#include <optional>

namespace msv {

struct GridSpec {
  int d = 1;
  double R = 1.0;
  int N = 3;
  double h = 1.0;

  int interior_per_axis() const noexcept { return N - 2; }
  Eigen::Index node_count() const noexcept;
  double cell_volume() const noexcept;  // h^d

  /// Per-axis interior indices of a node (each in [0, N-3]).
  std::vector<int> multi_index(Eigen::Index node) const;
  Eigen::Index node_of(const std::vector<int>& idx) const;
  Eigen::VectorXd point(Eigen::Index node) const;
  /// Node whose coordinates equal y up to h/4; throws std::invalid_argument otherwise.
  Eigen::Index node_at(const Eigen::VectorXd& y) const;
};

GridSpec build_grid(int d, double R, int N);

using PotentialFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

struct DiscreteOperator {
  Eigen::SparseMatrix<double> A;
  GridSpec grid;
  int m = 1;
  bool symmetric = false;
  std::optional<SystemSpec> spec;

  Eigen::Index size() const noexcept { return A.rows(); }
};

/// A = -div(Q grad .) - W(x) with W evaluated pointwise.
DiscreteOperator assemble_operator(const DiffusionField& q, int m, const PotentialFn& w, const GridSpec& grid);

/// A for the system operator, W = Vt = V - v I_m.
DiscreteOperator assemble(const SystemSpec& spec, const GridSpec& grid);

/// Relative asymmetry ||A - A^T||_max / ||A||_max.
double asymmetry(const Eigen::SparseMatrix<double>& a);

/// (h^d sum_x |f(x)|^p)^(1/p) with |f(x)| the euclidean norm over the m components;
/// p = infinity gives the max over nodes.
double discrete_norm(const Eigen::VectorXd& f, int m, double p, const GridSpec& grid);

/// Samples a vector-valued function at every interior node.
Eigen::VectorXd sample(const GridSpec& grid, int m, const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f);

/// Writes "row col value" lines (0-based) for every stored entry.
void write_coordinate(std::ostream& os, const Eigen::SparseMatrix<double>& a);

}  // namespace msv
