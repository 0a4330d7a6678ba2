#include "aseries/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace aseries {

NewtonResult newton_solve(const EvaluateFn& f, const Vector& z0, const NewtonOptions& opt) {
  Vector z = z0;
  double best = std::numeric_limits<double>::infinity();
  for (int it = 0;; ++it) {
    Evaluation ev = f(z);
    const double r = ev.residual.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(r)) throw NewtonError("newton: non-finite residual", best);
    best = std::min(best, r);
    if (r < opt.tol) return {z, it, r};
    if (it >= opt.max_iter) break;
    if (ev.jacobian.rows() != ev.jacobian.cols() || ev.jacobian.cols() != z.size())
      throw std::invalid_argument("newton: Jacobian is not square in the unknowns");
    z += solve(ev.jacobian, -ev.residual);
  }
  std::ostringstream os;
  os << "newton: no convergence after " << opt.max_iter << " iterations (best residual " << best << ")";
  throw NewtonError(os.str(), best);
}

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::fold: return "fold";
    case EventKind::cusp: return "cusp";
    case EventKind::swallowtail: return "swallowtail";
    case EventKind::butterfly: return "butterfly";
    case EventKind::blowup: return "blowup";
  }
  return "?";
}

Vector tangent(const LowRankSparse& jacobian, const Vector& previous) {
  if (jacobian.cols() != jacobian.rows() + 1 || previous.size() != jacobian.cols())
    throw std::invalid_argument("tangent: expected an n x (n+1) Jacobian");
  const LowRankSparse bordered = jacobian.with_row(previous);
  Vector rhs = Vector::Zero(bordered.rows());
  rhs[rhs.size() - 1] = 1.0;
  Vector t = solve(bordered, rhs);
  t.normalize();
  if (t.dot(previous) < 0) t = -t;
  return t;
}

BranchPoint make_point(const ContinuationProblem& p, const Vector& z, const Vector& t, double s, int iters) {
  BranchPoint pt;
  pt.z = z;
  pt.tangent = t;
  pt.s = s;
  pt.newton_iters = iters;
  if (p.parameter_index >= 0) pt.monitors.fold_direction = t[p.parameter_index];
  bool seen_cusp = false, seen_sw = false;
  for (const auto& m : p.monitors) {
    double v = std::numeric_limits<double>::quiet_NaN();
    try {
      v = m.value(z);
    } catch (const std::exception&) {
      // Monitors that need a solve fail where their system degenerates.
    }
    pt.monitor_values.push_back(v);
    if (!std::isfinite(v)) pt.monitors.blowup_flag = true;
    if (m.kind == EventKind::cusp && !seen_cusp) pt.monitors.cusp = v, seen_cusp = true;
    if (m.kind == EventKind::swallowtail && !seen_sw) pt.monitors.swallowtail = v, seen_sw = true;
    if (m.kind == EventKind::butterfly && !pt.monitors.butterfly) pt.monitors.butterfly = v;
  }
  if (p.signature) pt.signature = p.signature(z);
  return pt;
}

namespace {

// R(z) stacked with the linear row c^T (z - z_ref).
EvaluateFn with_constraint(const EvaluateFn& f, Vector c, Vector z_ref) {
  return [f, c = std::move(c), z_ref = std::move(z_ref)](const Vector& z) {
    Evaluation ev = f(z);
    Evaluation out;
    out.residual.resize(ev.residual.size() + 1);
    out.residual << ev.residual, c.dot(z - z_ref);
    out.jacobian = ev.jacobian.with_row(c);
    return out;
  };
}

}  // namespace

BranchPoint step(const ContinuationProblem& p, const BranchPoint& point, double ds, const StepOptions& opt) {
  const Vector zp = point.z + ds * point.tangent;
  const NewtonResult nr = newton_solve(with_constraint(p.evaluate, point.tangent, zp), zp, opt.newton);
  if ((nr.z - zp).norm() > std::abs(ds)) throw NewtonError("corrector left the step neighbourhood", 0.0);
  const Evaluation ev = p.evaluate(nr.z);
  const Vector t = tangent(ev.jacobian, point.tangent);
  return make_point(p, nr.z, t, point.s + ds, nr.iterations);
}

namespace {

bool opposite(double a, double b) { return std::isfinite(a) && std::isfinite(b) && a * b < 0.0; }

// Illinois-modified secant on sigma in (0, ds) for g(step(a, sigma)).
Event refine(const ContinuationProblem& p, const BranchPoint& a, const BranchPoint& b, EventKind kind,
             const std::string& name, const std::function<double(const BranchPoint&)>& g,
             const StepOptions& opt) {
  Event ev;
  ev.kind = kind;
  ev.monitor = name;
  ev.before = a;
  ev.after = b;

  double lo = 0.0, hi = b.s - a.s;
  double flo = g(a), fhi = g(b);
  const double scale = std::max(std::abs(flo), std::abs(fhi));
  const double tol = opt.event_tol * scale;
  BranchPoint best = std::abs(flo) < std::abs(fhi) ? a : b;
  double fbest = std::min(std::abs(flo), std::abs(fhi));
  int side = 0;
  const double width_tol = 1e-12 * hi;

  for (int k = 0; k < opt.max_refinement; ++k) {
    if (fbest < tol || hi - lo < width_tol) break;
    double sigma = (lo * fhi - hi * flo) / (fhi - flo);
    if (!(sigma > lo && sigma < hi)) sigma = 0.5 * (lo + hi);
    BranchPoint pt;
    try {
      pt = step(p, a, sigma, opt);
    } catch (const std::exception&) {
      sigma = 0.5 * (lo + hi);
      try {
        pt = step(p, a, sigma, opt);
      } catch (const std::exception&) {
        ev.approximate = true;
        break;
      }
    }
    ++ev.refinement_steps;
    const double fs = g(pt);
    if (!std::isfinite(fs)) {
      ev.approximate = true;
      break;
    }
    if (std::abs(fs) < fbest) best = pt, fbest = std::abs(fs);
    if ((fs < 0) == (flo < 0)) {
      lo = sigma, flo = fs;
      if (side == -1) fhi *= 0.5;
      side = -1;
    } else {
      hi = sigma, fhi = fs;
      if (side == 1) flo *= 0.5;
      side = 1;
    }
  }
  if (fbest >= tol) ev.approximate = true;
  ev.located = best;
  ev.monitor_residual = fbest;
  return ev;
}

}  // namespace

std::vector<Event> detect_events(const ContinuationProblem& p, const BranchPoint& a, const BranchPoint& b,
                                 const StepOptions& opt) {
  std::vector<Event> out;
  const int pi = p.parameter_index;
  if (pi >= 0 && opposite(a.tangent[pi], b.tangent[pi])) {
    out.push_back(refine(p, a, b, EventKind::fold, "tangent",
                         [pi](const BranchPoint& x) { return x.tangent[pi]; }, opt));
  }
  for (std::size_t i = 0; i < p.monitors.size(); ++i) {
    const Monitor& m = p.monitors[i];
    const double fa = a.monitor_values[i];
    const double fb = b.monitor_values[i];
    // Reported once, when the monitor leaves the bounded regime.
    const double sa = m.blowup_scale * fa, sb = m.blowup_scale * fb;
    if (m.watch_blowup && std::isfinite(fa) && std::abs(sa) <= BlowupThresholds{}.absolute &&
        monitor_blows_up(sa, sb)) {
      Event ev;
      ev.kind = EventKind::blowup;
      ev.monitor = m.name;
      ev.before = a;
      ev.after = b;
      ev.located = b;
      ev.monitor_residual = std::abs(fb);
      ev.approximate = true;
      out.push_back(std::move(ev));
      continue;
    }
    if (m.sign_events && opposite(fa, fb)) {
      out.push_back(refine(p, a, b, m.kind, m.name,
                           [i](const BranchPoint& x) { return x.monitor_values[i]; }, opt));
    }
  }
  return out;
}

BranchResult run_branch(const ContinuationProblem& p, const Vector& start, const BranchOptions& opt) {
  const int pi = p.parameter_index;
  if (pi < 0 || pi >= start.size()) throw std::invalid_argument("run_branch: invalid parameter index");
  const StepOptions& so = opt.step;

  Vector e = Vector::Zero(start.size());
  e[pi] = 1.0;
  NewtonResult nr;
  try {
    nr = newton_solve(with_constraint(p.evaluate, e, start), start, so.newton);
  } catch (const NewtonError& err) {
    throw NewtonError(std::string("start point: ") + err.what(), err.best_residual);
  }
  const Evaluation ev0 = p.evaluate(nr.z);
  const Vector t0 = tangent(ev0.jacobian, (opt.direction >= 0 ? 1.0 : -1.0) * e);

  BranchResult res;
  res.points.push_back(make_point(p, nr.z, t0, 0.0, nr.iterations));
  if (opt.on_point) opt.on_point(res.points.back());
  res.stop_reason = "step budget";

  double ds = std::clamp(so.ds0, so.ds_min, so.ds_max);
  int taken = 0;
  while (taken < opt.max_steps) {
    const BranchPoint& cur = res.points.back();
    BranchPoint next;
    try {
      next = step(p, cur, ds, so);
    } catch (const std::exception&) {
      ds *= 0.5;
      if (ds < so.ds_min) {
        res.stop_reason = "step size below minimum";
        break;
      }
      continue;
    }
    ++taken;
    for (std::size_t i = 0; i < p.monitors.size(); ++i)
      if (p.monitors[i].watch_blowup &&
          monitor_blows_up(p.monitors[i].blowup_scale * cur.monitor_values[i],
                           p.monitors[i].blowup_scale * next.monitor_values[i]))
        next.monitors.blowup_flag = true;

    std::vector<Event> evs = detect_events(p, cur, next, so);
    res.points.push_back(std::move(next));
    if (opt.on_point) opt.on_point(res.points.back());

    bool stop = false;
    for (auto& ev : evs) {
      if (std::find(opt.stop_on.begin(), opt.stop_on.end(), ev.kind) != opt.stop_on.end()) {
        if (!stop) res.stop_reason = "event: " + to_string(ev.kind);
        stop = true;
      }
      res.events.push_back(std::move(ev));
    }
    if (stop) break;

    const Vector& z = res.points.back().z;
    bool out_of_bounds = false;
    for (const Bound& b : opt.bounds)
      if (z[b.index] < b.lo || z[b.index] > b.hi) out_of_bounds = true;
    if (out_of_bounds) {
      res.stop_reason = "parameter bound";
      break;
    }
    if (opt.leave && opt.leave(res.points.back())) {
      res.stop_reason = "left region";
      break;
    }
    if (res.points.back().newton_iters <= so.grow_below_iters) ds = std::min(ds * so.grow, so.ds_max);
  }
  return res;
}

}  // namespace aseries
