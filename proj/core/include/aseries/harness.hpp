#pragma once

#include "aseries/augmented.hpp"
#include "aseries/continuation.hpp"
#include "aseries/poisson.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace aseries {

/// Continuation of an augmented system in variables where grid components
/// carry the factor sqrt(dx dy), so that Euclidean arclength approximates
/// the continuous L2 norm independently of the grid.
class AugmentedBranch {
 public:
  /// layout.active[designated] is the parameter used for orientation and
  /// fold detection.
  AugmentedBranch(const AugmentedSystem& system, SystemLayout layout, AugmentedState base,
                  int designated = 0);

  Vector to_z(const AugmentedState& s) const;
  AugmentedState to_state(const Vector& z) const;
  const SystemLayout& layout() const { return layout_; }
  const AugmentedSystem& system() const { return system_; }

  /// Problem with the standard monitors of the level: none at level 0,
  /// cusp at level 1 (plus the swallowtail value without events),
  /// swallowtail at level 2 (with blow-up watch).
  ContinuationProblem problem() const;

 private:
  const AugmentedSystem& system_;
  SystemLayout layout_;
  AugmentedState base_;
  int designated_;
  Vector scale_;  // per unknown
};

/// One row of the branch CSV.
struct BranchRow {
  int step = 0;
  double s = 0.0;
  Params lambda = Params::Zero();
  double norm_u_inf = 0.0;
  double u_center = 0.0;
  double monitor_fold = 0.0;
  double monitor_cusp = 0.0;
  double monitor_sw = 0.0;
  Sign signature = Sign::degenerate;
  int newton_iters = 0;
};

BranchRow branch_row(const AugmentedBranch& b, const BranchPoint& p, int step);
std::string branch_csv_header();
std::string branch_csv_line(const BranchRow& r);

/// Unit discrete-L2 eigenvector of G_u for the eigenvalue closest to zero,
/// by inverse iteration from a seeded random start.
Vector kernel_guess(const SparseMatrix& gu, const Grid& grid, std::uint64_t seed, int iterations = 8);

/// Newton on the square system of the layout, starting from `guess`.
struct Located {
  std::string kind;  ///< "fold", "cusp", "swallowtail"
  AugmentedState state;
  double residual_inf = 0.0;  ///< re-evaluated after the solve
  int newton_iters = 0;
  double cusp = 0.0;
  double swallowtail = 0.0;
  std::optional<double> butterfly;
};

Located locate(const AugmentedSystem& system, const AugmentedState& guess, const SystemLayout& layout,
               const NewtonOptions& opt = {});

struct HuntConfig {
  Params lambda0 = Params::Zero();
  std::uint64_t seed = 1;
  int max_steps = 400;  ///< per branch
  /// Small steps keep the corrector on the branch where cusp lines run close together.
  StepOptions step = [] {
    StepOptions s;
    s.ds0 = 0.01;
    s.ds_max = 0.05;
    return s;
  }();
  /// lambda2 directions tried for the fold line, lambda3 directions for the cusp line.
  std::vector<double> directions{1.0, -1.0};
  Params lambda_lo = Params::Constant(-50.0);
  Params lambda_hi = Params::Constant(50.0);
  NewtonOptions newton;
  bool record_branches = true;
  /// Last stage of the pipeline.
  Level target = Level::swallowtail;
};

struct HuntStageBranch {
  std::string stage;
  std::vector<BranchRow> rows;
  std::vector<Event> events;
  std::string stop_reason;
};

struct HuntReport {
  Grid grid;
  std::string nonlinearity;
  std::uint64_t seed = 0;
  std::string stage;  ///< last stage reached: "solution", "fold", "cusp", "swallowtail"
  std::vector<Located> chain;
  std::vector<HuntStageBranch> branches;
  double seconds = 0.0;
  std::string message;  ///< reason for a partial chain
};

/// solution -> fold -> cusp -> swallowtail by continuation, with each
/// singularity refined by Newton on its augmented system.
HuntReport hunt_swallowtail(const Nonlinearity& nl, const Grid& grid, const HuntConfig& config = {});

/// Newton-only chain fold -> cusp -> swallowtail from a guess. With a pinned
/// layout u stays fixed, which is the right setting on trivial branches.
HuntReport locate_chain(const Nonlinearity& nl, const Grid& grid, const AugmentedState& guess,
                        bool pinned, const NewtonOptions& opt = {});

struct RefineResult {
  AugmentedState state;
  int newton_iters = 0;
  double residual_inf = 0.0;
  bool converged = false;
};

/// Bilinear transfer of (u, alpha, vbar) to `target`, renormalization of
/// alpha, then Newton on the swallowtail system.
RefineResult refine_on_grid(const Nonlinearity& nl, const Grid& from, const AugmentedState& state,
                            const Grid& target, bool pinned = false, const NewtonOptions& opt = {});

struct ConvergenceRow {
  int N = 0;
  bool present = false;
  Params lambda = Params::Zero();
  double distance_to_finest = 0.0;
  double successive_difference = 0.0;  ///< to the previous row; 0 for the first
  int newton_iters = 0;
  double residual_inf = 0.0;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
};

/// Chained refinement across square grids N x N, seeded by a swallowtail
/// state on `seed_grid`. Grids are visited outward from the seed grid, each
/// refined from its solved neighbour; a failure ends that direction.
ConvergenceTable convergence_study(const Nonlinearity& nl, const std::vector<int>& grids,
                                   const Grid& seed_grid, const AugmentedState& seed, bool pinned = false,
                                   const NewtonOptions& opt = {});

/// The same table from a separate hunt on every grid. Hunts may end on
/// different swallowtails; rows without one are marked absent.
ConvergenceTable independent_convergence_study(const Nonlinearity& nl, const std::vector<int>& grids,
                                               const HuntConfig& config);

/// Rows of a table as (dx, distance_to_finest) CSV.
std::string convergence_csv(const ConvergenceTable& t);

struct GeometrySlice {
  double lambda3 = 0.0;
  int cusp_events = 0;
  std::vector<BranchRow> fold_line;
  std::vector<std::string> stop_reasons;
  bool lost = false;
};

struct GeometryConfig {
  double delta = 0.0;           ///< 0 selects 10% of |lambda3 at the swallowtail|
  double lambda2_window = 1.0;  ///< continue while |lambda2 - lambda2_sw| <= window
  /// Continue while the discrete L2 distance of u from the swallowtail
  /// solution stays below radius * ||u_sw||; 0 disables the test.
  double radius = 0.08;
  int max_steps = 400;
  StepOptions step = HuntConfig{}.step;
  std::uint64_t seed = 1;
};

struct GeometryReport {
  GeometrySlice plus;   ///< lambda3_sw + delta
  GeometrySlice minus;  ///< lambda3_sw - delta
  double delta = 0.0;
  bool at_singularity = false;
  std::string message;
};

/// Fold lines in (lambda1, lambda2) at lambda3 = lambda3_sw +- delta with
/// cusp events counted along each.
GeometryReport verify_swallowtail_geometry(const Nonlinearity& nl, const Grid& grid,
                                           const AugmentedState& swallowtail, const GeometryConfig& config = {});

/// JSON documents. With a non-empty directory, grid functions are saved as
/// files there and referenced by name (which starts with `prefix`);
/// otherwise values are inlined. Readers resolve names against the
/// directory of the report, so `directory` should be that directory.
std::string hunt_report_json(const HuntReport& r, const std::string& directory = "",
                             const std::string& prefix = "");
std::string convergence_table_json(const ConvergenceTable& t);
std::string geometry_report_json(const GeometryReport& r);

/// Located singularity (state and grid) from a hunt report document.
struct SeedState {
  Grid grid;
  std::string nonlinearity;
  std::string kind;
  AugmentedState state;
};
/// The last chain entry, or the last one of the given kind.
SeedState read_seed_report(const std::string& path, const std::string& kind = "");

/// Branch rows stored in a hunt report document, by stage name.
std::vector<std::pair<std::string, std::vector<BranchRow>>> read_report_branches(const std::string& path);

}  // namespace aseries
