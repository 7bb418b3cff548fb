#include "msv/grid.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace msv {

Eigen::Index GridSpec::node_count() const noexcept {
  Eigen::Index n = 1;
  for (int k = 0; k < d; ++k) n *= interior_per_axis();
  return n;
}

double GridSpec::cell_volume() const noexcept { return std::pow(h, d); }

std::vector<int> GridSpec::multi_index(Eigen::Index node) const {
  std::vector<int> idx(static_cast<std::size_t>(d));
  const Eigen::Index n = interior_per_axis();
  for (int k = 0; k < d; ++k) {
    idx[static_cast<std::size_t>(k)] = static_cast<int>(node % n);
    node /= n;
  }
  return idx;
}

Eigen::Index GridSpec::node_of(const std::vector<int>& idx) const {
  Eigen::Index node = 0;
  for (int k = d - 1; k >= 0; --k) node = node * interior_per_axis() + idx[static_cast<std::size_t>(k)];
  return node;
}

Eigen::VectorXd GridSpec::point(Eigen::Index node) const {
  Eigen::VectorXd x(d);
  const auto idx = multi_index(node);
  // Offsets from the center keep the center node at exactly 0 and mirror nodes exact negatives.
  const int mid = (N - 1) / 2;
  for (int k = 0; k < d; ++k) x(k) = (idx[static_cast<std::size_t>(k)] + 1 - mid) * h;
  return x;
}

Eigen::Index GridSpec::node_at(const Eigen::VectorXd& y) const {
  if (y.size() != d) throw std::invalid_argument("point dimension differs from grid dimension");
  std::vector<int> idx(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) {
    const double pos = (y(k) + R) / h;
    const double r = std::round(pos);
    if (std::abs(pos - r) > 0.25 || r < 1 || r > N - 2)
      throw std::invalid_argument("point is not an interior grid node");
    idx[static_cast<std::size_t>(k)] = static_cast<int>(r) - 1;
  }
  return node_of(idx);
}

GridSpec build_grid(int d, double R, int N) {
  if (d < 1) throw std::invalid_argument("grid dimension must be positive");
  if (!(R > 0.0)) throw std::invalid_argument("R must be positive");
  if (N < 3) throw std::invalid_argument("N must be at least 3");
  if (N % 2 == 0) throw std::invalid_argument("N must be odd");
  return GridSpec{d, R, N, 2.0 * R / (N - 1)};
}

DiscreteOperator assemble_operator(const DiffusionField& q, int m, const PotentialFn& w, const GridSpec& grid) {
  const int d = grid.d;
  if (q.dim() != d) throw std::invalid_argument("Q dimension differs from grid dimension");
  const Eigen::Index nodes = grid.node_count();
  const int n = grid.interior_per_axis();
  const double h = grid.h;
  const double inv_h2 = 1.0 / (h * h);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(nodes) * static_cast<std::size_t>(m) *
               static_cast<std::size_t>(1 + 2 * d + 4 * d * (d - 1) + m));

  auto add = [&](Eigen::Index row_node, Eigen::Index col_node, double value) {
    for (int c = 0; c < m; ++c) trip.emplace_back(row_node * m + c, col_node * m + c, value);
  };
  // Neighbor node with offsets, or -1 when it falls on the boundary.
  auto shifted = [&](std::vector<int> idx, int axis_a, int da, int axis_b, int db) -> Eigen::Index {
    idx[static_cast<std::size_t>(axis_a)] += da;
    if (axis_b >= 0) idx[static_cast<std::size_t>(axis_b)] += db;
    for (int v : idx)
      if (v < 0 || v >= n) return -1;
    return grid.node_of(idx);
  };

  for (Eigen::Index node = 0; node < nodes; ++node) {
    const auto idx = grid.multi_index(node);
    const Eigen::VectorXd x = grid.point(node);
    double diag = 0.0;
    for (int j = 0; j < d; ++j) {
      Eigen::VectorXd xp = x, xm = x;
      xp(j) += 0.5 * h;
      xm(j) -= 0.5 * h;
      const double qp = q.entry(j, j).eval({xp.data(), static_cast<std::size_t>(d)});
      const double qm = q.entry(j, j).eval({xm.data(), static_cast<std::size_t>(d)});
      diag += (qp + qm) * inv_h2;
      if (const auto nb = shifted(idx, j, +1, -1, 0); nb >= 0) add(node, nb, -qp * inv_h2);
      if (const auto nb = shifted(idx, j, -1, -1, 0); nb >= 0) add(node, nb, -qm * inv_h2);

      for (int l = 0; l < d; ++l) {
        if (l == j || (q.entry(j, l).is_constant() && q.entry(j, l).root()->value == 0.0)) continue;
        // -(1/4h^2) [Q_jl(x+e_j)(u(x+e_j+e_l) - u(x+e_j-e_l)) - Q_jl(x-e_j)(u(x-e_j+e_l) - u(x-e_j-e_l))]
        Eigen::VectorXd xj_p = x, xj_m = x;
        xj_p(j) += h;
        xj_m(j) -= h;
        const double cp = q.entry(j, l).eval({xj_p.data(), static_cast<std::size_t>(d)}) * 0.25 * inv_h2;
        const double cm = q.entry(j, l).eval({xj_m.data(), static_cast<std::size_t>(d)}) * 0.25 * inv_h2;
        if (const auto nb = shifted(idx, j, +1, l, +1); nb >= 0) add(node, nb, -cp);
        if (const auto nb = shifted(idx, j, +1, l, -1); nb >= 0) add(node, nb, +cp);
        if (const auto nb = shifted(idx, j, -1, l, +1); nb >= 0) add(node, nb, +cm);
        if (const auto nb = shifted(idx, j, -1, l, -1); nb >= 0) add(node, nb, -cm);
      }
    }
    add(node, node, diag);
    const Eigen::MatrixXd wx = w(x);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        if (wx(a, b) != 0.0) trip.emplace_back(node * m + a, node * m + b, -wx(a, b));
  }

  DiscreteOperator op;
  op.A.resize(nodes * m, nodes * m);
  op.A.setFromTriplets(trip.begin(), trip.end());
  op.A.makeCompressed();
  op.grid = grid;
  op.m = m;
  op.symmetric = asymmetry(op.A) <= 1e-12;
  return op;
}

DiscreteOperator assemble(const SystemSpec& spec, const GridSpec& grid) {
  spec.validate();
  if (spec.d != grid.d) throw std::invalid_argument("system dimension differs from grid dimension");
  auto op = assemble_operator(spec.Q, spec.m, [&](const Eigen::VectorXd& x) { return spec.vtilde_at(x); }, grid);
  op.spec = spec;
  return op;
}

double asymmetry(const Eigen::SparseMatrix<double>& a) {
  const Eigen::SparseMatrix<double> at = a.transpose();
  const Eigen::SparseMatrix<double> diff = a - at;
  double dmax = 0.0, amax = 0.0;
  for (Eigen::Index k = 0; k < diff.nonZeros(); ++k) dmax = std::max(dmax, std::abs(diff.valuePtr()[k]));
  for (Eigen::Index k = 0; k < a.nonZeros(); ++k) amax = std::max(amax, std::abs(a.valuePtr()[k]));
  return amax == 0.0 ? 0.0 : dmax / amax;
}

double discrete_norm(const Eigen::VectorXd& f, int m, double p, const GridSpec& grid) {
  if (!(p >= 1.0)) throw std::invalid_argument("p must be >= 1");
  const Eigen::Index nodes = f.size() / m;
  if (std::isinf(p)) {
    double mx = 0.0;
    for (Eigen::Index k = 0; k < nodes; ++k) mx = std::max(mx, f.segment(k * m, m).norm());
    return mx;
  }
  double s = 0.0;
  for (Eigen::Index k = 0; k < nodes; ++k) s += std::pow(f.segment(k * m, m).norm(), p);
  return std::pow(grid.cell_volume() * s, 1.0 / p);
}

Eigen::VectorXd sample(const GridSpec& grid, int m, const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f) {
  const Eigen::Index nodes = grid.node_count();
  Eigen::VectorXd out(nodes * m);
  for (Eigen::Index k = 0; k < nodes; ++k) out.segment(k * m, m) = f(grid.point(k));
  return out;
}

void write_coordinate(std::ostream& os, const Eigen::SparseMatrix<double>& a) {
  os.precision(17);
  for (int col = 0; col < a.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, col); it; ++it)
      os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

}  // namespace msv
