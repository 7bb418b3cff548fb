#pragma once

// Coefficient fields of the operator div(Q grad u) + Vt u, Vt = V - v I_m,
// and sampled checkers for the structural hypotheses on them.

#include "msv/expr.hpp"
#include "msv/sampling.hpp"

#include <Eigen/Dense>

#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace msv {

using expr::PotentialExpr;

/// Symmetric d x d field; only the upper triangle is stored.
class DiffusionField {
 public:
  DiffusionField() = default;
  /// `rows` must be square; entry (j, i) for j > i is ignored after checking
  /// it prints identically to (i, j). Throws std::invalid_argument otherwise.
  explicit DiffusionField(const std::vector<std::vector<PotentialExpr>>& rows);

  static DiffusionField identity(int dim);
  static DiffusionField constant(const Eigen::MatrixXd& q);

  int dim() const noexcept { return dim_; }
  const PotentialExpr& entry(int i, int j) const;
  Eigen::MatrixXd eval(const Eigen::VectorXd& x) const;
  bool is_constant() const;

 private:
  int dim_ = 0;
  std::vector<PotentialExpr> upper_;  // row-major upper triangle
};

/// m x m field of scalar expressions.
class MatrixField {
 public:
  MatrixField() = default;
  MatrixField(int size, int dim, std::vector<PotentialExpr> entries);  // row-major
  explicit MatrixField(const std::vector<std::vector<PotentialExpr>>& rows);

  static MatrixField constant(const Eigen::MatrixXd& w, int dim);

  int size() const noexcept { return size_; }
  int dim() const noexcept { return dim_; }
  const PotentialExpr& entry(int i, int j) const { return entries_[static_cast<std::size_t>(i * size_ + j)]; }
  Eigen::MatrixXd eval(const Eigen::VectorXd& x) const;

  /// Entry-wise partial derivative along `axis`.
  MatrixField partial(int axis) const;

  /// Entries (i, j) and (j, i) have identical printed forms.
  bool is_structurally_symmetric() const;
  bool origin_singular_gradient() const;

  /// W - s * I.
  MatrixField minus_scalar(const PotentialExpr& s) const;
  MatrixField plus(const MatrixField& other) const;

 private:
  int size_ = 0;
  int dim_ = 0;
  std::vector<PotentialExpr> entries_;
};

struct SystemSpec {
  int d = 1;
  int m = 1;
  DiffusionField Q;
  MatrixField V;
  PotentialExpr v;
  std::optional<double> alpha;  // growth exponent when v = 1 + |x|^alpha is declared

  /// Vt = V - v I_m as an expression field.
  MatrixField vtilde() const;
  Eigen::MatrixXd vtilde_at(const Eigen::VectorXd& x) const;
  bool symmetric() const { return V.is_structurally_symmetric(); }

  /// Throws std::invalid_argument on dimension mismatches.
  void validate() const;
};

/// Builds a system from expression strings. An empty `q` means Q = I_d.
/// Throws expr::ParseError or std::invalid_argument.
SystemSpec make_system(int d, const std::vector<std::vector<std::string>>& q,
                       const std::vector<std::vector<std::string>>& v_mat, const std::string& v,
                       std::optional<double> alpha = std::nullopt);

enum class Verdict { HoldsOnSample, Fails, UnboundedTrend };

const char* to_string(Verdict v) noexcept;

/// Concrete point at which a sampled inequality `lhs <relation> rhs` is
/// violated. Indices are 1-based; 0 means not applicable.
struct Witness {
  Eigen::VectorXd x;
  Eigen::VectorXd xi;  // direction; for complex xi = a + ib stored as (a, b)
  int i = 0;
  int j = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string relation;  // human-readable form of the inequality, e.g. "lhs > rhs"
};

struct Series {
  std::string name;
  std::vector<double> radius;
  std::vector<double> value;
};

struct CheckReport {
  std::string name;
  Verdict verdict = Verdict::HoldsOnSample;
  std::vector<std::pair<std::string, double>> constants;
  std::optional<Witness> witness;
  std::vector<Series> series;
  std::vector<std::string> notes;
  SampleSpec samples;

  void set(const std::string& key, double value);
  /// NaN when absent.
  double get(const std::string& key) const;
};

/// Margin used to certify strict sign conditions (x > 0, x < 0).
inline constexpr double kStrictMargin = 1e-10;
/// Trend slope above which a supposedly bounded quantity counts as growing.
inline constexpr double kTrendSlope = 0.05;

CheckReport ellipticity_check(const DiffusionField& q, const SampleSet& s);
CheckReport dissipativity_check(const MatrixField& w, const SampleSet& s);

std::vector<double> default_gamma_grid();
CheckReport gradient_condition_check(const MatrixField& v, const std::vector<double>& gamma_grid,
                                     const SampleSet& s);

CheckReport grad_ratio_check(const PotentialExpr& v, const SampleSet& s);

std::vector<double> default_eps_grid();
CheckReport okazawa_check(const PotentialExpr& v, const DiffusionField& q, const std::vector<double>& eps_grid,
                          const SampleSet& s);

/// M(x) = inf over unit xi in C^m of Re<-Vt xi, xi> / |Im<Vt xi, xi>|.
double sectoriality_at(const Eigen::MatrixXd& w);
CheckReport sectoriality_check(const SystemSpec& spec, const SampleSet& s);

CheckReport offdiagonal_sign_check(const SystemSpec& spec, const SampleSet& s);
CheckReport coercivity_check(const MatrixField& w, const SampleSet& s);
CheckReport little_o_check(const MatrixField& v_mat, const PotentialExpr& v, double alpha, const SampleSet& s);

}  // namespace msv
