#include "aseries/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <future>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

namespace aseries {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string level_name(Level l) {
  switch (l) {
    case Level::solution: return "solution";
    case Level::fold: return "fold";
    case Level::cusp: return "cusp";
    case Level::swallowtail: return "swallowtail";
  }
  return "?";
}

}  // namespace

// --- branch adapter -------------------------------------------------------------

AugmentedBranch::AugmentedBranch(const AugmentedSystem& system, SystemLayout layout, AugmentedState base,
                                 int designated)
    : system_(system), layout_(std::move(layout)), base_(std::move(base)), designated_(designated) {
  if (designated_ < 0 || designated_ >= static_cast<int>(layout_.active.size()))
    throw std::invalid_argument("AugmentedBranch: designated parameter not active");
  base_.level = layout_.level;
  const int nz = system_.unknowns(layout_);
  const int na = static_cast<int>(layout_.active.size());
  scale_ = Vector::Constant(nz, std::sqrt(system_.grid().cell()));
  scale_.tail(na).setOnes();
}

Vector AugmentedBranch::to_z(const AugmentedState& s) const {
  return system_.pack(s, layout_).cwiseProduct(scale_);
}

AugmentedState AugmentedBranch::to_state(const Vector& z) const {
  return system_.unpack(z.cwiseQuotient(scale_), base_, layout_);
}

ContinuationProblem AugmentedBranch::problem() const {
  ContinuationProblem p;
  const Vector inv = scale_.cwiseInverse();
  p.evaluate = [this, inv](const Vector& z) {
    Evaluation ev = system_.evaluate(to_state(z), layout_);
    ev.jacobian.sparse = ev.jacobian.sparse * inv.asDiagonal();
    for (Eigen::Index k = 0; k < ev.jacobian.rank_terms(); ++k)
      ev.jacobian.right.col(k) = ev.jacobian.right.col(k).cwiseProduct(inv);
    return ev;
  };
  p.parameter_index = system_.unknowns(layout_) - static_cast<int>(layout_.active.size()) + designated_;

  auto cusp = [this](const Vector& z) { return system_.cusp_monitor(to_state(z)); };
  auto sw = [this](const Vector& z) {
    const AugmentedState s = to_state(z);
    return system_.swallowtail_monitor(s, system_.solve_v(s).v);
  };
  if (layout_.level == Level::fold) {
    p.monitors.push_back({EventKind::cusp, "cusp", cusp, true, false});
    p.monitors.push_back({EventKind::swallowtail, "swallowtail", sw, false, false});
  } else if (layout_.level == Level::cusp) {
    p.monitors.push_back({EventKind::cusp, "cusp", cusp, false, false});
    // Monitors are grid sums; the cell area makes blow-up thresholds grid independent.
    p.monitors.push_back({EventKind::swallowtail, "swallowtail", sw, true, true, system_.grid().cell()});
  }
  p.signature = [this](const Vector& z) { return solution_signature(system_.gu(to_state(z))); };
  return p;
}

BranchRow branch_row(const AugmentedBranch& b, const BranchPoint& p, int step) {
  const AugmentedState s = b.to_state(p.z);
  const Grid& g = b.system().grid();
  BranchRow r;
  r.step = step;
  r.s = p.s;
  r.lambda = s.lambda;
  r.norm_u_inf = s.u.lpNorm<Eigen::Infinity>();
  r.u_center = s.u[g.index((g.N + 1) / 2, (g.M + 1) / 2)];
  r.monitor_fold = p.monitors.fold_direction;
  const bool has_monitors = b.layout().level >= Level::fold;
  r.monitor_cusp = has_monitors ? p.monitors.cusp : kNaN;
  r.monitor_sw = has_monitors ? p.monitors.swallowtail : kNaN;
  r.signature = p.signature;
  r.newton_iters = p.newton_iters;
  return r;
}

std::string branch_csv_header() {
  return "step,s,lambda1,lambda2,lambda3,norm_u_inf,u_center,monitor_fold,monitor_cusp,monitor_sw,"
         "signature,newton_iters";
}

std::string branch_csv_line(const BranchRow& r) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << r.step << ',' << r.s << ',' << r.lambda[0] << ',' << r.lambda[1] << ',' << r.lambda[2] << ','
     << r.norm_u_inf << ',' << r.u_center << ',' << r.monitor_fold << ',' << r.monitor_cusp << ','
     << r.monitor_sw << ',' << static_cast<int>(r.signature) << ',' << r.newton_iters;
  return os.str();
}

// --- direct location --------------------------------------------------------------

Vector kernel_guess(const SparseMatrix& gu, const Grid& grid, std::uint64_t seed, int iterations) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector x(gu.rows());
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = dist(rng);

  double norm = 0.0;
  for (Eigen::Index k = 0; k < gu.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(gu, k); it; ++it) norm = std::max(norm, std::abs(it.value()));
  // A tiny shift keeps the factorization regular at an exact fold.
  const SparseMatrix shifted = gu - (1e-10 * norm) * sparse_identity(gu.rows());
  const LowRankSparseSolver solver{LowRankSparse(shifted)};
  for (int it = 0; it < iterations; ++it) {
    x = solver.solve(x);
    x /= x.norm();
  }
  Eigen::Index imax = 0;
  x.cwiseAbs().maxCoeff(&imax);
  if (x[imax] < 0) x = -x;
  return x / std::sqrt(grid.cell() * x.squaredNorm());
}

Located locate(const AugmentedSystem& system, const AugmentedState& guess, const SystemLayout& layout,
               const NewtonOptions& opt) {
  AugmentedState base = guess;
  base.level = layout.level;
  const EvaluateFn f = [&](const Vector& z) { return system.evaluate(system.unpack(z, base, layout), layout); };
  const NewtonResult nr = newton_solve(f, system.pack(base, layout), opt);

  Located loc;
  loc.kind = level_name(layout.level);
  loc.state = system.unpack(nr.z, base, layout);
  loc.residual_inf = system.residual(loc.state, layout).lpNorm<Eigen::Infinity>();
  loc.newton_iters = nr.iterations;
  if (layout.level >= Level::fold) {
    loc.cusp = system.cusp_monitor(loc.state);
    try {
      const VSolve vs = system.solve_v(loc.state);
      loc.swallowtail = system.swallowtail_monitor(loc.state, vs.v);
      if (layout.level == Level::swallowtail) loc.butterfly = system.butterfly_monitor(loc.state, vs.v);
    } catch (const SingularMatrixError&) {
      loc.swallowtail = kNaN;
    }
  }
  return loc;
}

// --- hunt -------------------------------------------------------------------------

namespace {

std::vector<Bound> parameter_bounds(const AugmentedBranch& b, const HuntConfig& c) {
  std::vector<Bound> out;
  const int na = static_cast<int>(b.layout().active.size());
  const int nz = b.system().unknowns(b.layout());
  for (int a = 0; a < na; ++a) {
    const int i = b.layout().active[static_cast<std::size_t>(a)];
    out.push_back({nz - na + a, c.lambda_lo[i], c.lambda_hi[i]});
  }
  return out;
}

HuntStageBranch record(const std::string& stage, const AugmentedBranch& b, const BranchResult& res, bool rows) {
  HuntStageBranch h;
  h.stage = stage;
  if (rows)
    for (std::size_t i = 0; i < res.points.size(); ++i)
      h.rows.push_back(branch_row(b, res.points[i], static_cast<int>(i)));
  h.events = res.events;
  h.stop_reason = res.stop_reason;
  return h;
}

const Event* first_event(const BranchResult& r, EventKind kind) {
  for (const auto& e : r.events)
    if (e.kind == kind) return &e;
  return nullptr;
}

}  // namespace

HuntReport hunt_swallowtail(const Nonlinearity& nl, const Grid& grid, const HuntConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  auto finish = [&](HuntReport& r) {
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
  };
  AugmentedSystem sys(grid, nl);
  HuntReport rep;
  rep.grid = grid;
  rep.nonlinearity = nl.name();
  rep.seed = config.seed;
  rep.stage = "solution";

  AugmentedState s0;
  s0.level = Level::solution;
  s0.u = Vector::Zero(grid.size());
  s0.lambda = config.lambda0;
  if (config.target == Level::solution) return finish(rep);

  // Solution branch in lambda1 up to the first fold.
  const AugmentedBranch b0(sys, {Level::solution, {0}, false}, s0, 0);
  BranchOptions bo;
  bo.step = config.step;
  bo.max_steps = config.max_steps;
  bo.stop_on = {EventKind::fold};
  bo.bounds = parameter_bounds(b0, config);
  const BranchResult r0 = run_branch(b0.problem(), b0.to_z(s0), bo);
  rep.branches.push_back(record("solution", b0, r0, config.record_branches));
  const Event* fold_ev = first_event(r0, EventKind::fold);
  if (!fold_ev) {
    rep.message = "no fold on the solution branch (" + r0.stop_reason + ")";
    return finish(rep);
  }

  AugmentedState fguess = b0.to_state(fold_ev->located.z);
  fguess.alpha = kernel_guess(sys.gu(fguess), grid, config.seed);
  Located fold;
  try {
    fold = locate(sys, fguess, {Level::fold, {0}, false}, config.newton);
  } catch (const std::exception& e) {
    rep.message = std::string("fold refinement failed: ") + e.what();
    return finish(rep);
  }
  rep.chain.push_back(fold);
  rep.stage = "fold";
  if (config.target <= Level::fold) return finish(rep);

  // Fold line in (lambda1, lambda2) up to a cusp.
  std::optional<Located> cusp;
  for (double dir : config.directions) {
    const AugmentedBranch b1(sys, {Level::fold, {0, 1}, false}, fold.state, 1);
    BranchOptions o = bo;
    o.stop_on = {EventKind::cusp};
    o.direction = dir;
    o.bounds = parameter_bounds(b1, config);
    BranchResult r1;
    try {
      r1 = run_branch(b1.problem(), b1.to_z(fold.state), o);
    } catch (const std::exception& e) {
      rep.message = std::string("fold line: ") + e.what();
      continue;
    }
    rep.branches.push_back(record(dir > 0 ? "fold-line+" : "fold-line-", b1, r1, config.record_branches));
    if (const Event* ev = first_event(r1, EventKind::cusp)) {
      try {
        cusp = locate(sys, b1.to_state(ev->located.z), {Level::cusp, {0, 1}, false}, config.newton);
        break;
      } catch (const std::exception& e) {
        rep.message = std::string("cusp refinement failed: ") + e.what();
      }
    }
  }
  if (!cusp) {
    if (rep.message.empty()) rep.message = "no cusp on the fold line";
    return finish(rep);
  }
  rep.chain.push_back(*cusp);
  rep.stage = "cusp";
  rep.message.clear();
  if (config.target <= Level::cusp) return finish(rep);

  // Cusp line in (lambda1, lambda2, lambda3) up to a swallowtail.
  std::optional<Located> sw;
  for (double dir : config.directions) {
    const AugmentedBranch b2(sys, {Level::cusp, {0, 1, 2}, false}, cusp->state, 2);
    BranchOptions o = bo;
    o.stop_on = {EventKind::swallowtail};
    o.direction = dir;
    o.bounds = parameter_bounds(b2, config);
    BranchResult r2;
    try {
      r2 = run_branch(b2.problem(), b2.to_z(cusp->state), o);
    } catch (const std::exception& e) {
      rep.message = std::string("cusp line: ") + e.what();
      continue;
    }
    rep.branches.push_back(record(dir > 0 ? "cusp-line+" : "cusp-line-", b2, r2, config.record_branches));
    if (const Event* ev = first_event(r2, EventKind::swallowtail)) {
      AugmentedState g = b2.to_state(ev->located.z);
      g.vbar = Vector::Zero(grid.size());
      try {
        sw = locate(sys, g, {Level::swallowtail, {0, 1, 2}, false}, config.newton);
        break;
      } catch (const std::exception& e) {
        rep.message = std::string("swallowtail refinement failed: ") + e.what();
      }
    }
  }
  if (!sw) {
    if (rep.message.empty()) rep.message = "no swallowtail on the cusp line";
    return finish(rep);
  }
  rep.chain.push_back(*sw);
  rep.stage = "swallowtail";
  rep.message.clear();
  return finish(rep);
}

HuntReport locate_chain(const Nonlinearity& nl, const Grid& grid, const AugmentedState& guess, bool pinned,
                        const NewtonOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  AugmentedSystem sys(grid, nl);
  HuntReport rep;
  rep.grid = grid;
  rep.nonlinearity = nl.name();
  rep.stage = "solution";

  AugmentedState s = guess;
  if (s.u.size() == 0) s.u = Vector::Zero(grid.size());
  if (s.alpha.size() == 0) s.alpha = kernel_guess(sys.gu(s), grid, 1);
  const std::vector<SystemLayout> layouts{
      {Level::fold, {0}, pinned}, {Level::cusp, {0, 1}, pinned}, {Level::swallowtail, {0, 1, 2}, pinned}};
  try {
    for (const auto& layout : layouts) {
      if (layout.level == Level::swallowtail && s.vbar.size() == 0) s.vbar = Vector::Zero(grid.size());
      const Located loc = locate(sys, s, layout, opt);
      rep.chain.push_back(loc);
      rep.stage = loc.kind;
      s = loc.state;
    }
  } catch (const std::exception& e) {
    rep.message = e.what();
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

// --- refinement and convergence -----------------------------------------------------

RefineResult refine_on_grid(const Nonlinearity& nl, const Grid& from, const AugmentedState& state,
                            const Grid& target, bool pinned, const NewtonOptions& opt) {
  AugmentedSystem sys(target, nl);
  AugmentedState s;
  s.level = Level::swallowtail;
  s.lambda = state.lambda;
  s.u = interpolate(GridFunction(from, state.u), target).values;
  s.alpha = sys.normalized(interpolate(GridFunction(from, state.alpha), target).values);
  s.vbar = state.vbar.size() ? interpolate(GridFunction(from, state.vbar), target).values
                             : Vector::Zero(target.size());
  const SystemLayout layout{Level::swallowtail, {0, 1, 2}, pinned};
  RefineResult out;
  out.state = s;
  try {
    const Located loc = locate(sys, s, layout, opt);
    out.state = loc.state;
    out.newton_iters = loc.newton_iters;
    out.residual_inf = loc.residual_inf;
    out.converged = true;
  } catch (const NewtonError& e) {
    out.residual_inf = e.best_residual;
  } catch (const SingularMatrixError&) {
    out.residual_inf = kNaN;
  }
  return out;
}

namespace {

void fill_distances(ConvergenceTable& t) {
  const ConvergenceRow* finest = nullptr;
  for (const auto& r : t.rows)
    if (r.present) finest = &r;
  const ConvergenceRow* last = nullptr;
  for (auto& r : t.rows) {
    if (!r.present) continue;
    r.distance_to_finest = (r.lambda - finest->lambda).norm();
    r.successive_difference = last ? (r.lambda - last->lambda).norm() : 0.0;
    last = &r;
  }
}

}  // namespace

ConvergenceTable convergence_study(const Nonlinearity& nl, const std::vector<int>& grids, const Grid& seed_grid,
                                   const AugmentedState& seed, bool pinned, const NewtonOptions& opt) {
  ConvergenceTable t;
  for (int n : grids) t.rows.push_back({.N = n});

  // Walk outward from the seed grid in both directions so that every solve
  // starts from the closest grid already solved.
  std::vector<std::size_t> order(grids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return grids[a] < grids[b]; });
  const int n0 = seed_grid.N;
  std::vector<std::size_t> up, down;
  for (std::size_t i : order) (grids[i] >= n0 ? up : down).push_back(i);
  std::reverse(down.begin(), down.end());

  for (const auto* chain : {&up, &down}) {
    Grid prev_grid = seed_grid;
    AugmentedState prev = seed;
    for (std::size_t i : *chain) {
      ConvergenceRow& row = t.rows[i];
      const Grid g(row.N, row.N);
      const RefineResult r = refine_on_grid(nl, prev_grid, prev, g, pinned, opt);
      row.residual_inf = r.residual_inf;
      row.newton_iters = r.newton_iters;
      if (!r.converged) break;
      row.present = true;
      row.lambda = r.state.lambda;
      prev = r.state;
      prev_grid = g;
    }
  }
  fill_distances(t);
  return t;
}

ConvergenceTable independent_convergence_study(const Nonlinearity& nl, const std::vector<int>& grids,
                                               const HuntConfig& config) {
  // Hunts on different grids share nothing but the const nonlinearity.
  std::vector<std::future<HuntReport>> hunts;
  for (int n : grids)
    hunts.push_back(std::async(std::launch::async, [&nl, &config, n] {
      return hunt_swallowtail(nl, Grid(n, n), config);
    }));
  ConvergenceTable t;
  for (std::size_t i = 0; i < grids.size(); ++i) {
    ConvergenceRow row;
    row.N = grids[i];
    const HuntReport r = hunts[i].get();
    if (r.stage == "swallowtail") {
      row.present = true;
      row.lambda = r.chain.back().state.lambda;
      row.newton_iters = r.chain.back().newton_iters;
      row.residual_inf = r.chain.back().residual_inf;
    }
    t.rows.push_back(row);
  }
  fill_distances(t);
  return t;
}

std::string convergence_csv(const ConvergenceTable& t) {
  std::ostringstream os;
  os << std::setprecision(17) << "N,dx,distance_to_finest\n";
  for (const auto& r : t.rows)
    if (r.present) os << r.N << ',' << 1.0 / (r.N + 1) << ',' << r.distance_to_finest << '\n';
  return os.str();
}

// --- swallowtail geometry ------------------------------------------------------------

GeometryReport verify_swallowtail_geometry(const Nonlinearity& nl, const Grid& grid,
                                           const AugmentedState& swallowtail, const GeometryConfig& config) {
  GeometryReport rep;
  rep.delta = config.delta != 0.0 ? std::abs(config.delta) : 0.1 * std::abs(swallowtail.lambda[2]);
  if (rep.delta == 0.0) {
    rep.at_singularity = true;
    rep.message = "at singularity: zero offset in lambda3";
    return rep;
  }
  AugmentedSystem sys(grid, nl);
  const double l2sw = swallowtail.lambda[1];
  const double usw_norm = std::sqrt(grid.cell()) * swallowtail.u.norm();

  auto slice = [&](double sign) {
    GeometrySlice sl;
    AugmentedState s = swallowtail;
    s.level = Level::fold;
    s.lambda[2] += sign * rep.delta;
    sl.lambda3 = s.lambda[2];
    Located fold;
    try {
      fold = locate(sys, s, {Level::fold, {0}, false});
    } catch (const std::exception& e) {
      sl.lost = true;
      sl.stop_reasons.push_back(std::string("fold start: ") + e.what());
      return sl;
    }
    std::vector<BranchRow> back;
    for (double dir : {-1.0, 1.0}) {
      const AugmentedBranch b(sys, {Level::fold, {0, 1}, false}, fold.state, 1);
      BranchOptions o;
      o.step = config.step;
      o.max_steps = config.max_steps;
      o.direction = dir;
      const int nz = sys.unknowns(b.layout());
      o.bounds = {{nz - 1, l2sw - config.lambda2_window, l2sw + config.lambda2_window}};
      if (config.radius > 0.0) {
        const double r = config.radius * usw_norm;
        o.leave = [&b, &swallowtail, &grid, r](const BranchPoint& p) {
          return std::sqrt(grid.cell()) * (b.to_state(p.z).u - swallowtail.u).norm() > r;
        };
      }
      BranchResult r;
      try {
        r = run_branch(b.problem(), b.to_z(fold.state), o);
      } catch (const std::exception& e) {
        sl.lost = true;
        sl.stop_reasons.push_back(e.what());
        continue;
      }
      sl.stop_reasons.push_back(r.stop_reason);
      if (r.stop_reason == "step size below minimum") sl.lost = true;
      for (const auto& e : r.events)
        if (e.kind == EventKind::cusp) ++sl.cusp_events;
      for (std::size_t i = 0; i < r.points.size(); ++i) {
        BranchRow row = branch_row(b, r.points[i], static_cast<int>(i));
        if (dir < 0) {
          row.step = -row.step;
          row.s = -row.s;
          back.push_back(row);
        } else if (i > 0) {
          sl.fold_line.push_back(row);
        }
      }
    }
    std::vector<BranchRow> line(back.rbegin(), back.rend());
    line.insert(line.end(), sl.fold_line.begin(), sl.fold_line.end());
    sl.fold_line = std::move(line);
    return sl;
  };
  rep.plus = slice(1.0);
  rep.minus = slice(-1.0);
  return rep;
}

// --- documents ----------------------------------------------------------------------

namespace {

using nlohmann::json;

json params_json(const Params& p) { return json::array({p[0], p[1], p[2]}); }

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json grid_field(const Grid& g, const Vector& v, const std::string& dir, const std::string& name) {
  if (v.size() == 0) return nullptr;
  if (dir.empty()) return vector_json(v);
  std::filesystem::create_directories(dir);
  save_grid_function((std::filesystem::path(dir) / name).string(), GridFunction(g, v));
  return json{{"file", name}};
}

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json located_json(const Located& l, const Grid& g, const std::string& dir, const std::string& prefix,
                 std::size_t idx) {
  const std::string stem = prefix + std::to_string(idx) + "_" + l.kind + "_";
  json j{{"kind", l.kind},
         {"lambda", params_json(l.state.lambda)},
         {"residual_inf", number(l.residual_inf)},
         {"newton_iters", l.newton_iters},
         {"cusp", number(l.cusp)},
         {"swallowtail", number(l.swallowtail)},
         {"u", grid_field(g, l.state.u, dir, stem + "u.txt")},
         {"alpha", grid_field(g, l.state.alpha, dir, stem + "alpha.txt")},
         {"vbar", grid_field(g, l.state.vbar, dir, stem + "vbar.txt")}};
  if (l.butterfly) j["butterfly"] = number(*l.butterfly);
  return j;
}

Vector read_field(const json& j, const Grid& g, const std::filesystem::path& base) {
  if (j.is_null()) return Vector();
  if (j.is_object()) {
    const GridFunction f = load_grid_function((base / j.at("file").get<std::string>()).string());
    if (!(f.grid == g)) throw std::runtime_error("seed report: grid function on a different grid");
    return f.values;
  }
  const auto v = j.get<std::vector<double>>();
  if (static_cast<int>(v.size()) != g.size()) throw std::runtime_error("seed report: wrong field length");
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::string hunt_report_json(const HuntReport& r, const std::string& directory, const std::string& prefix) {
  json j{{"grid", {{"N", r.grid.N}, {"M", r.grid.M}}},
         {"nonlinearity", r.nonlinearity},
         {"seed", r.seed},
         {"stage", r.stage},
         {"message", r.message}};
  json chain = json::array();
  for (std::size_t i = 0; i < r.chain.size(); ++i) chain.push_back(located_json(r.chain[i], r.grid, directory, prefix, i));
  j["chain"] = chain;
  json branches = json::array();
  for (const auto& b : r.branches) {
    json events = json::array();
    for (const auto& e : b.events) {
      events.push_back({{"kind", to_string(e.kind)},
                        {"monitor", e.monitor},
                        {"arclength", e.located.s},
                        {"monitor_residual", number(e.monitor_residual)},
                        {"approximate", e.approximate},
                        {"refinement_steps", e.refinement_steps}});
    }
    json rows = json::array();
    for (const auto& row : b.rows)
      rows.push_back({row.step, row.s, row.lambda[0], row.lambda[1], row.lambda[2], row.norm_u_inf,
                      row.u_center, number(row.monitor_fold), number(row.monitor_cusp), number(row.monitor_sw),
                      static_cast<int>(row.signature), row.newton_iters});
    branches.push_back({{"stage", b.stage},
                        {"points", b.rows.size()},
                        {"stop_reason", b.stop_reason},
                        {"events", events},
                        {"rows", rows}});
  }
  j["branches"] = branches;
  return j.dump(2);
}

std::string convergence_table_json(const ConvergenceTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows) {
    json row{{"N", r.N}, {"present", r.present}};
    if (r.present) {
      row["lambda"] = params_json(r.lambda);
      row["distance_to_finest"] = r.distance_to_finest;
      row["successive_difference"] = r.successive_difference;
      row["newton_iters"] = r.newton_iters;
      row["residual_inf"] = number(r.residual_inf);
    }
    rows.push_back(row);
  }
  return json{{"rows", rows}}.dump(2);
}

std::string geometry_report_json(const GeometryReport& r) {
  auto slice = [](const GeometrySlice& s) {
    return json{{"lambda3", s.lambda3},
                {"cusp_events", s.cusp_events},
                {"fold_line_points", s.fold_line.size()},
                {"stop_reasons", s.stop_reasons},
                {"lost", s.lost}};
  };
  return json{{"delta", r.delta},
              {"at_singularity", r.at_singularity},
              {"message", r.message},
              {"plus", slice(r.plus)},
              {"minus", slice(r.minus)}}
      .dump(2);
}

namespace {

json read_document(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  try {
    json j;
    is >> j;
    return j;
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

double number_or_nan(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

}  // namespace

std::vector<std::pair<std::string, std::vector<BranchRow>>> read_report_branches(const std::string& path) {
  const json j = read_document(path);
  std::vector<std::pair<std::string, std::vector<BranchRow>>> out;
  try {
    for (const json& b : j.at("branches")) {
      std::vector<BranchRow> rows;
      for (const json& r : b.value("rows", json::array())) {
        BranchRow row;
        row.step = r.at(0).get<int>();
        row.s = r.at(1).get<double>();
        row.lambda = Params(r.at(2).get<double>(), r.at(3).get<double>(), r.at(4).get<double>());
        row.norm_u_inf = r.at(5).get<double>();
        row.u_center = r.at(6).get<double>();
        row.monitor_fold = number_or_nan(r.at(7));
        row.monitor_cusp = number_or_nan(r.at(8));
        row.monitor_sw = number_or_nan(r.at(9));
        row.signature = static_cast<Sign>(r.at(10).get<int>());
        row.newton_iters = r.at(11).get<int>();
        rows.push_back(row);
      }
      out.emplace_back(b.at("stage").get<std::string>(), std::move(rows));
    }
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return out;
}

SeedState read_seed_report(const std::string& path, const std::string& kind) {
  const json j = read_document(path);
  SeedState s;
  s.grid = Grid(j.at("grid").at("N").get<int>(), j.at("grid").at("M").get<int>());
  s.nonlinearity = j.value("nonlinearity", "");
  const json& chain = j.at("chain");
  const json* pick = nullptr;
  for (const json& e : chain)
    if (kind.empty() || e.at("kind").get<std::string>() == kind) pick = &e;
  if (!pick)
    throw std::runtime_error(path + ": report has no located " + (kind.empty() ? "singularity" : kind));
  const json& last = *pick;
  s.kind = last.at("kind").get<std::string>();
  const auto lam = last.at("lambda").get<std::vector<double>>();
  if (lam.size() != 3) throw std::runtime_error(path + ": lambda must have three entries");
  s.state.lambda = Params(lam[0], lam[1], lam[2]);
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  s.state.u = read_field(last.at("u"), s.grid, base);
  s.state.alpha = read_field(last.value("alpha", json()), s.grid, base);
  s.state.vbar = read_field(last.value("vbar", json()), s.grid, base);
  s.state.level = s.kind == "swallowtail" ? Level::swallowtail
                  : s.kind == "cusp"      ? Level::cusp
                  : s.kind == "fold"      ? Level::fold
                                          : Level::solution;
  return s;
}

}  // namespace aseries
