#pragma once

#include "aseries/augmented.hpp"
#include "aseries/linalg.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace aseries {

class NewtonError : public std::runtime_error {
 public:
  NewtonError(const std::string& what, double best_residual)
      : std::runtime_error(what), best_residual(best_residual) {}
  double best_residual;
};

struct NewtonOptions {
  double tol = 1e-9;  ///< on the infinity norm of the residual
  int max_iter = 25;
};

struct NewtonResult {
  Vector z;
  int iterations = 0;
  double residual_inf = 0.0;
};

using EvaluateFn = std::function<Evaluation(const Vector&)>;

/// Newton's method for a square system. Throws NewtonError when the
/// iteration does not converge and SingularMatrixError on a singular step.
NewtonResult newton_solve(const EvaluateFn& f, const Vector& z0, const NewtonOptions& opt = {});

enum class EventKind { fold, cusp, swallowtail, butterfly, blowup };

std::string to_string(EventKind k);

struct Monitor {
  EventKind kind = EventKind::cusp;
  std::string name;
  std::function<double(const Vector&)> value;
  bool sign_events = true;    ///< report sign changes as events
  bool watch_blowup = false;  ///< also report blow-up events for this monitor
  double blowup_scale = 1.0;  ///< values are multiplied by this before the blow-up test
};

/// R: R^{n+1} -> R^n with Jacobian n x (n+1).
struct ContinuationProblem {
  EvaluateFn evaluate;
  int parameter_index = -1;  ///< z-index of the designated parameter
  std::vector<Monitor> monitors;
  std::function<Sign(const Vector&)> signature;  ///< optional
};

struct BranchPoint {
  Vector z;
  double s = 0.0;
  Vector tangent;
  std::vector<double> monitor_values;  ///< aligned with problem.monitors
  MonitorRecord monitors;
  Sign signature = Sign::degenerate;
  int newton_iters = 0;
};

struct Event {
  EventKind kind = EventKind::fold;
  std::string monitor;  ///< monitor name; "tangent" for folds
  BranchPoint before;
  BranchPoint after;
  BranchPoint located;  ///< refined point (equals `after` for blow-up events)
  double monitor_residual = 0.0;
  bool approximate = false;
  int refinement_steps = 0;
};

struct StepOptions {
  double ds0 = 0.05;
  double ds_min = 1e-5;
  double ds_max = 0.5;
  double grow = 1.3;
  int grow_below_iters = 3;  ///< grow after convergence in at most this many iterations
  NewtonOptions newton;
  double event_tol = 1e-8;  ///< relative to the monitor scale over the bracket
  int max_refinement = 40;
};

struct Bound {
  int index;  ///< z-index
  double lo;
  double hi;
};

struct BranchOptions {
  StepOptions step;
  int max_steps = 200;
  double direction = 1.0;  ///< initial sign of the designated parameter's tangent component
  std::vector<Bound> bounds;
  std::vector<EventKind> stop_on;  ///< stop after the first event of any of these kinds
  std::function<void(const BranchPoint&)> on_point;  ///< called for every accepted point
  std::function<bool(const BranchPoint&)> leave;     ///< optional region test; true stops the branch
};

struct BranchResult {
  std::vector<BranchPoint> points;
  std::vector<Event> events;
  std::string stop_reason;
};

/// Unit null vector of the n x (n+1) Jacobian oriented by `previous`
/// (dot product positive). Throws SingularMatrixError when rank deficient.
Vector tangent(const LowRankSparse& jacobian, const Vector& previous);

/// Fills tangent-dependent and monitor fields of a converged point.
BranchPoint make_point(const ContinuationProblem& p, const Vector& z, const Vector& tangent, double s,
                       int iters);

/// One predictor-corrector step of length ds. Throws NewtonError on
/// corrector failure.
BranchPoint step(const ContinuationProblem& p, const BranchPoint& point, double ds,
                 const StepOptions& opt = {});

/// Events between two consecutive accepted points, refined by secant
/// iteration on the arclength of re-steps from `a`.
std::vector<Event> detect_events(const ContinuationProblem& p, const BranchPoint& a,
                                 const BranchPoint& b, const StepOptions& opt = {});

/// Corrects the start with the designated parameter fixed, then steps
/// adaptively until the step budget, a bound, or a requested event.
BranchResult run_branch(const ContinuationProblem& p, const Vector& start, const BranchOptions& opt);

}  // namespace aseries
