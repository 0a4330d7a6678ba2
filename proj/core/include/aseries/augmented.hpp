#pragma once

#include "aseries/linalg.hpp"
#include "aseries/poisson.hpp"

#include <optional>
#include <vector>

namespace aseries {

/// Augmentation level: 0 solution, 1 fold, 2 cusp, 3 swallowtail.
enum class Level { solution = 0, fold = 1, cusp = 2, swallowtail = 3 };

int scalar_equations(Level level);  ///< 0, 1, 2, 3: scalar rows besides the grid blocks

/// Stacked unknowns (u, alpha, vbar, lambda). alpha is used from level 1 on,
/// vbar only at level 3.
struct AugmentedState {
  Level level = Level::solution;
  Vector u;
  Vector alpha;
  Vector vbar;
  Params lambda = Params::Zero();
};

struct Evaluation {
  Vector residual;
  LowRankSparse jacobian;
};

/// Column selection and row layout of an augmented system.
struct SystemLayout {
  Level level = Level::solution;
  std::vector<int> active;  ///< free parameter indices (0-based), in column order
  /// Hold u fixed and drop the G rows. Needed on trivial branches where the
  /// u-block of the Jacobian is singular (e.g. u = 0 of the polynomial family).
  bool pinned = false;
};

struct VSolve {
  Vector vbar;
  Vector v;                   ///< G_u vbar
  double projected_residual;  ///< || P (G_u v + f_uu.alpha^2) ||_inf, P projecting off alpha
};

struct MonitorRecord {
  double fold_direction = 0.0;
  double cusp = 0.0;
  double swallowtail = 0.0;
  std::optional<double> butterfly;
  bool blowup_flag = false;
};

/// Augmented systems of the discretized semilinear Poisson problem
///   G(u, lambda) = L u + f(u, lambda) = 0
/// with fold, cusp and swallowtail conditions. Componentwise products are
/// written with '.', vector powers are componentwise.
class AugmentedSystem {
 public:
  AugmentedSystem(Grid grid, const Nonlinearity& nl);

  const Grid& grid() const { return grid_; }
  const SparseMatrix& laplacian() const { return L_; }
  const Nonlinearity& nonlinearity() const { return nl_; }
  int n() const { return grid_.size(); }

  /// Residual and Jacobian; Jacobian columns are (u, alpha, vbar, lambda_1..3)
  /// restricted to the level.
  Evaluation f0(const AugmentedState& s) const;
  /// Rows [G; G_u alpha; dx dy alpha^T alpha - 1].
  Evaluation f1(const AugmentedState& s) const;
  /// f1 rows plus f_uu^T alpha^3.
  Evaluation f2(const AugmentedState& s) const;
  /// f2 rows plus (G_u^2 + alpha alpha^T) vbar + f_uu.alpha^2 and
  /// f_uuu^T alpha^4 + 6 (f_uu.alpha^2)^T G_u vbar + 3 vbar^T G_u^3 vbar.
  Evaluation f3(const AugmentedState& s) const;
  Evaluation evaluate_full(const AugmentedState& s) const;

  /// Evaluation with the layout applied (pinned rows/columns removed,
  /// inactive parameter columns dropped).
  Evaluation evaluate(const AugmentedState& s, const SystemLayout& layout) const;
  Vector residual(const AugmentedState& s, const SystemLayout& layout) const;

  /// Unknown vector z = (u, alpha, vbar, lambda_active) for the layout.
  Vector pack(const AugmentedState& s, const SystemLayout& layout) const;
  AugmentedState unpack(const Vector& z, const AugmentedState& base, const SystemLayout& layout) const;
  int unknowns(const SystemLayout& layout) const;
  int equations(const SystemLayout& layout) const;

  SparseMatrix gu(const AugmentedState& s) const;

  double cusp_monitor(const AugmentedState& s) const;
  /// (G_u^2 + alpha alpha^T) vbar = -f_uu.alpha^2, v = G_u vbar.
  VSolve solve_v(const AugmentedState& s) const;
  /// f_uuu^T alpha^4 + 6 (f_uu.alpha^2)^T v + 3 v^T G_u v.
  double swallowtail_monitor(const AugmentedState& s, const Vector& v) const;
  /// Sixth F3 row written with the cube of G_u, for cross-checking the
  /// evaluation through v = G_u vbar.
  double swallowtail_row_cubic_form(const AugmentedState& s) const;
  /// Solves for w and evaluates f_uuuu^T alpha^5 - 15 (f_uu.alpha)^T v^2 + 10 (f_uu.alpha^2)^T w.
  double butterfly_monitor(const AugmentedState& s, const Vector& v) const;

  /// Discrete L2-normalized copy of alpha (dx dy alpha^T alpha = 1).
  Vector normalized(const Vector& alpha) const;

 private:
  Grid grid_;
  const Nonlinearity& nl_;
  SparseMatrix L_;
};

/// Sign of det(G_u) from a sparse symmetric factorization.
Sign solution_signature(const SparseMatrix& gu);

struct BlowupThresholds {
  double absolute = 1e6;
  double growth = 100.0;
  double growth_floor = 1e2;  ///< growth is only tested once |value| exceeds this
};

/// D4 heuristic: the monitor grows beyond bounds between two steps.
bool monitor_blows_up(double previous, double current, const BlowupThresholds& t = {});

}  // namespace aseries
