#include "commands.hpp"

#include "tensor_file.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

namespace aseries::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

const char* level_name(Level l) {
  switch (l) {
    case Level::solution: return "solution";
    case Level::fold: return "fold";
    case Level::cusp: return "cusp";
    case Level::swallowtail: return "swallowtail";
  }
  return "?";
}

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string params_text(const Params& p) {
  std::ostringstream os;
  os << std::setprecision(10) << '(' << p[0] << ", " << p[1] << ", " << p[2] << ')';
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream os(path);
  if (!os) throw NumericalFailure("cannot write " + path);
  os << text;
  if (!os) throw NumericalFailure("error writing " + path);
}

std::string rows_csv(const std::vector<BranchRow>& rows) {
  std::string s = branch_csv_header() + "\n";
  for (const auto& r : rows) s += branch_csv_line(r) + "\n";
  return s;
}

/// "dir/name.csv" -> "dir/name" + suffix.
std::string sibling(const std::string& path, const std::string& suffix) {
  fs::path p(path);
  p.replace_extension();
  return p.string() + suffix;
}

const Grid& require_grid(const RunConfig& c) {
  if (!c.grid) throw UsageError("--grid is required (for example --grid 15x15)");
  return *c.grid;
}

Params hunt_start(const RunConfig& c) {
  if (c.lambda_given || c.problem != "bratu") return c.lambda;
  // The cusp line through lambda3 = 0 misses the swallowtails of this grid
  // family; lambda3 = 0.05 lies on a cusp line that reaches one.
  return Params(0.0, 0.0, 0.05);
}

HuntConfig hunt_config(const RunConfig& c) {
  HuntConfig h;
  h.lambda0 = hunt_start(c);
  h.seed = c.seed;
  h.max_steps = c.max_steps;
  h.step = c.step;
  h.newton = c.step.newton;
  h.target = c.target;
  return h;
}

std::unique_ptr<Nonlinearity> nonlinearity_named(const RunConfig& c, const std::string& name) {
  if (name != "bratu" && name != "polynomial") throw UsageError("unknown nonlinearity '" + name + "' in report");
  RunConfig copy = c;
  copy.problem = name;
  return make_nonlinearity(copy);
}

std::vector<int> default_active(Level l) {
  switch (l) {
    case Level::solution: return {0};
    case Level::fold: return {0, 1};
    default: return {0, 1, 2};
  }
}

json event_json(const AugmentedBranch& b, const Event& e) {
  const AugmentedState s = b.to_state(e.located.z);
  return {{"kind", to_string(e.kind)},
          {"monitor", e.monitor},
          {"arclength", e.located.s},
          {"lambda", {s.lambda[0], s.lambda[1], s.lambda[2]}},
          {"norm_u_inf", s.u.lpNorm<Eigen::Infinity>()},
          {"monitor_residual", number(e.monitor_residual)},
          {"approximate", e.approximate},
          {"refinement_steps", e.refinement_steps}};
}

void print_report(const SingularityReport& r, std::ostream& out) {
  out << "classification: " << r.describe() << '\n';
  out << "kernel dimension: " << r.kernel_dimension << '\n';
  out << std::setprecision(17);
  for (std::size_t i = 0; i < r.test_values.size(); ++i)
    out << "r" << i + 3 << " = " << r.test_values[i] << '\n';
}

}  // namespace

// --- continue -------------------------------------------------------------------------

int cmd_continue(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const Grid& grid = require_grid(c);
  if (c.level == Level::swallowtail)
    throw UsageError("--level must be 0, 1 or 2; the swallowtail system has no free parameter");
  const std::vector<int> active = c.active.empty() ? default_active(c.level) : c.active;
  if (static_cast<int>(active.size()) != scalar_equations(c.level) + 1)
    throw UsageError("level " + std::to_string(static_cast<int>(c.level)) + " needs " +
                     std::to_string(scalar_equations(c.level) + 1) + " active parameters");

  const auto nl = make_nonlinearity(c);
  AugmentedSystem sys(grid, *nl);

  AugmentedState start;
  if (!c.start.empty()) {
    const SeedState seed = read_seed_report(c.start, c.kind);
    if (!(seed.grid == grid)) throw UsageError(c.start + ": report grid differs from --grid");
    if (seed.state.level < c.level) throw UsageError(c.start + ": " + seed.kind + " cannot start a higher level");
    start = seed.state;
  } else if (c.level == Level::solution) {
    start.u = Vector::Zero(grid.size());
    start.lambda = c.lambda;
  } else {
    HuntConfig h = hunt_config(c);
    h.target = c.level;
    h.record_branches = false;
    const HuntReport rep = hunt_swallowtail(*nl, grid, h);
    if (rep.stage != level_name(c.level))
      throw NumericalFailure("no " + std::string(level_name(c.level)) + " to start from: " + rep.message);
    start = rep.chain.back().state;
  }
  start.level = c.level;

  const SystemLayout layout{c.level, active, c.pinned};
  const int designated = static_cast<int>(active.size()) - 1;
  const AugmentedBranch b(sys, layout, start, designated);
  BranchOptions o;
  o.step = c.step;
  o.max_steps = c.max_steps;
  o.stop_on = c.stop_on;
  const HuntConfig limits;
  const int nz = sys.unknowns(layout);
  const int na = static_cast<int>(active.size());
  for (int k = 0; k < na; ++k)
    o.bounds.push_back({nz - na + k, limits.lambda_lo[active[k]], limits.lambda_hi[active[k]]});

  BranchResult res;
  try {
    res = run_branch(b.problem(), b.to_z(start), o);
  } catch (const std::exception& e) {
    throw NumericalFailure(std::string("continuation failed: ") + e.what());
  }

  std::vector<BranchRow> rows;
  for (std::size_t i = 0; i < res.points.size(); ++i) rows.push_back(branch_row(b, res.points[i], static_cast<int>(i)));
  json events = json::array();
  for (const auto& e : res.events) events.push_back(event_json(b, e));
  json doc{{"grid", {{"N", grid.N}, {"M", grid.M}}},
           {"nonlinearity", nl->name()},
           {"level", static_cast<int>(c.level)},
           {"active", active},
           {"points", res.points.size()},
           {"stop_reason", res.stop_reason},
           {"events", events}};

  const std::string events_path = !c.events.empty() ? c.events
                                  : !c.out.empty()  ? sibling(c.out, ".events.json")
                                                    : std::string();
  if (c.out.empty()) {
    out << rows_csv(rows);
  } else {
    write_file(c.out, rows_csv(rows));
  }
  if (!events_path.empty()) write_file(events_path, doc.dump(2) + "\n");

  std::ostream& log = c.out.empty() ? err : out;
  log << res.points.size() << " points, stopped: " << res.stop_reason << '\n';
  for (const auto& e : res.events) {
    const AugmentedState s = b.to_state(e.located.z);
    log << to_string(e.kind) << " at lambda = " << params_text(s.lambda) << (e.approximate ? " (approximate)" : "")
        << '\n';
  }
  return 0;
}

// --- hunt -----------------------------------------------------------------------------

int cmd_hunt(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const Grid& grid = require_grid(c);
  const auto nl = make_nonlinearity(c);
  const HuntReport rep = hunt_swallowtail(*nl, grid, hunt_config(c));

  if (c.out.empty()) {
    out << hunt_report_json(rep) << '\n';
  } else {
    std::string dir, prefix;
    if (!c.inline_fields) {
      const fs::path p(c.out);
      dir = p.has_parent_path() ? p.parent_path().string() : ".";
      prefix = p.stem().string() + "_";
    }
    write_file(c.out, hunt_report_json(rep, dir, prefix) + "\n");
  }

  std::ostream& log = c.out.empty() ? err : out;
  log << "stage reached: " << rep.stage << '\n';
  for (const auto& l : rep.chain)
    log << "  " << l.kind << " at lambda = " << params_text(l.state.lambda) << ", residual " << l.residual_inf
        << ", " << l.newton_iters << " Newton steps\n";
  if (!rep.message.empty()) log << rep.message << '\n';
  err << std::setprecision(3) << "hunt took " << rep.seconds << " s\n";
  if (rep.stage != level_name(c.target))
    throw NumericalFailure("hunt stopped at " + rep.stage + ", target was " + level_name(c.target));
  return 0;
}

// --- converge -------------------------------------------------------------------------

int cmd_converge(const RunConfig& c, std::ostream& out, std::ostream& err) {
  if (c.grids.empty()) throw UsageError("--grids is required (for example --grids 10:85:5)");
  ConvergenceTable table;
  if (c.independent) {
    const auto nl = make_nonlinearity(c);
    RunConfig h = c;
    h.target = Level::swallowtail;
    table = independent_convergence_study(*nl, c.grids, hunt_config(h));
  } else {
    if (c.seed_report.empty()) throw UsageError("--seed-report is required unless --independent is given");
    const SeedState seed = read_seed_report(c.seed_report, "swallowtail");
    const auto nl = nonlinearity_named(c, seed.nonlinearity);
    table = convergence_study(*nl, c.grids, seed.grid, seed.state, c.pinned, c.step.newton);
  }

  if (!c.out.empty()) {
    write_file(c.out, convergence_table_json(table) + "\n");
    write_file(sibling(c.out, ".csv"), convergence_csv(table));
  }
  std::ostream& log = out;
  log << std::setprecision(10);
  int missing = 0;
  for (const auto& r : table.rows) {
    if (!r.present) {
      ++missing;
      log << "N=" << r.N << "  no swallowtail\n";
      continue;
    }
    log << "N=" << r.N << "  lambda = " << params_text(r.lambda) << "  distance " << r.distance_to_finest
        << "  successive " << r.successive_difference << '\n';
  }
  if (c.out.empty()) out << '\n' << convergence_csv(table);
  if (missing) {
    err << missing << " grid(s) without a swallowtail\n";
    return 1;
  }
  return 0;
}

// --- classify -------------------------------------------------------------------------

int cmd_classify(const RunConfig& c, std::ostream& out, std::ostream&) {
  if (!c.tensors.empty()) {
    TensorFile t = read_tensor_file(c.tensors);
    const int order = static_cast<int>(t.tensors.size());
    if (order < 3) throw UsageError(c.tensors + ": at least orders 1 to 3 are needed");
    std::unique_ptr<DenseTensorOracle> oracle;
    try {
      oracle = std::make_unique<DenseTensorOracle>(t.dimension, std::move(t.tensors));
    } catch (const std::invalid_argument& e) {
      throw UsageError(c.tensors + ": " + e.what());
    }
    SingularityReport r;
    try {
      r = detect(*oracle, c.tolerances, std::min(c.max_order, order));
    } catch (const InsufficientJetError& e) {
      throw UsageError(c.tensors + ": " + e.what());
    } catch (const std::exception& e) {
      throw NumericalFailure(e.what());
    }
    print_report(r, out);
    return 0;
  }
  if (c.seed_report.empty()) throw UsageError("classify needs --tensors or --seed-report");
  const SeedState seed = read_seed_report(c.seed_report, c.kind);
  const auto nl = nonlinearity_named(c, seed.nonlinearity);
  const PoissonOracle oracle(seed.state.u, seed.state.lambda, *nl, build_laplacian(seed.grid));
  const int order = std::min(c.max_order, oracle.max_order());
  SingularityReport r;
  try {
    if (seed.state.alpha.size() == oracle.dimension())
      r = detect_with_alpha(oracle, seed.state.alpha.normalized(), c.tolerances, order);
    else
      r = detect(oracle, c.tolerances, order);
  } catch (const std::exception& e) {
    throw NumericalFailure(e.what());
  }
  out << seed.kind << " from " << c.seed_report << " at lambda = " << params_text(seed.state.lambda) << '\n';
  print_report(r, out);
  return 0;
}

// --- export-plot ----------------------------------------------------------------------

int cmd_export_plot(const RunConfig& c, std::ostream& out, std::ostream&) {
  if (c.report.empty()) throw UsageError("--report is required");
  const fs::path dir = c.out_dir.empty() ? fs::path(".") : fs::path(c.out_dir);
  if (c.figure == "branches") {
    std::map<std::string, int> seen;
    for (const auto& [stage, rows] : read_report_branches(c.report)) {
      const int n = seen[stage]++;
      const std::string name = stage + (n ? "_" + std::to_string(n) : "") + ".csv";
      write_file((dir / name).string(), rows_csv(rows));
      out << (dir / name).string() << ": " << rows.size() << " rows\n";
    }
    return 0;
  }
  const SeedState seed = read_seed_report(c.report, "swallowtail");
  const auto nl = nonlinearity_named(c, seed.nonlinearity);
  GeometryConfig g;
  g.delta = c.delta;
  g.radius = c.radius;
  g.max_steps = c.max_steps;
  g.step = c.step;
  g.seed = c.seed;
  const GeometryReport rep = verify_swallowtail_geometry(*nl, seed.grid, seed.state, g);
  write_file((dir / "geometry.json").string(), geometry_report_json(rep) + "\n");
  write_file((dir / "fold_line_plus.csv").string(), rows_csv(rep.plus.fold_line));
  write_file((dir / "fold_line_minus.csv").string(), rows_csv(rep.minus.fold_line));
  out << std::setprecision(10) << "lambda3 = " << rep.plus.lambda3 << ": " << rep.plus.cusp_events
      << " cusp events\n"
      << "lambda3 = " << rep.minus.lambda3 << ": " << rep.minus.cusp_events << " cusp events\n";
  if (rep.at_singularity) throw NumericalFailure(rep.message);
  if (rep.plus.lost || rep.minus.lost) throw NumericalFailure("a fold line was lost");
  return 0;
}

// --- command line ---------------------------------------------------------------------

namespace {

struct Command {
  const char* name;
  const char* help;
  std::vector<std::string> keys;
  int (*fn)(const RunConfig&, std::ostream&, std::ostream&);
};

const std::vector<std::string> kStep{"ds0", "ds-min", "ds-max", "max-steps", "tol", "max-iter", "event-tol"};
const std::vector<std::string> kFlags{"independent", "pinned", "inline"};

std::vector<std::string> with_step(std::vector<std::string> keys) {
  keys.insert(keys.end(), kStep.begin(), kStep.end());
  return keys;
}

std::string option_help(const std::string& key) {
  static const std::map<std::string, std::string> help{
      {"problem", "bratu or polynomial"},
      {"coefficients", "polynomial c4,c5,... (comma separated)"},
      {"grid", "interior grid, NxM or N"},
      {"lambda", "initial lambda1,lambda2,lambda3"},
      {"fixed", "override lambda components, e.g. l3=0"},
      {"level", "0 solution, 1 fold, 2 cusp"},
      {"active", "free parameters, e.g. l1,l2; the last one orients the branch"},
      {"stop-on", "stop at the first event of these kinds (fold,cusp,swallowtail,blowup)"},
      {"seed", "random seed for kernel vectors"},
      {"target", "last hunt stage: fold, cusp or swallowtail"},
      {"grids", "grid sizes, first:last:step or a comma list"},
      {"independent", "hunt on every grid instead of refining a seed"},
      {"pinned", "hold u fixed (trivial branches)"},
      {"inline", "store grid functions inside the report"},
      {"max-order", "highest test order r^(n)"},
      {"gradient-tol", "criticality tolerance"},
      {"kernel-ratio", "singular value ratio that starts the kernel"},
      {"zero-tol", "threshold for a vanishing test value"},
      {"delta", "lambda3 offset of the slices (0: 10% of lambda3)"},
      {"radius", "relative neighbourhood of the swallowtail solution (0: off)"},
      {"figure", "branches or geometry"},
      {"kind", "chain entry to use from a report (fold, cusp, swallowtail)"},
      {"out", "output file"},
      {"events", "events JSON file"},
      {"out-dir", "output directory"},
      {"start", "hunt report to start from"},
      {"seed-report", "hunt report with a located singularity"},
      {"report", "hunt report"},
      {"tensors", "dense tensor file"},
      {"ds0", "initial arclength step"},
      {"ds-min", "smallest step before a branch gives up"},
      {"ds-max", "largest step"},
      {"max-steps", "step budget per branch"},
      {"tol", "Newton tolerance on the residual infinity norm"},
      {"max-iter", "Newton iteration limit"},
      {"event-tol", "monitor tolerance for event refinement"},
  };
  const auto it = help.find(key);
  return it == help.end() ? std::string() : it->second;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  const std::vector<std::string> common{"problem", "coefficients", "seed"};
  const std::vector<Command> commands{
      {"continue", "trace a branch of solutions, folds or cusps",
       with_step({"grid", "lambda", "fixed", "level", "active", "stop-on", "start", "kind", "pinned", "out",
                  "events"}),
       cmd_continue},
      {"hunt", "locate fold, cusp and swallowtail by continuation",
       with_step({"grid", "lambda", "fixed", "target", "out", "inline"}), cmd_hunt},
      {"converge", "follow a swallowtail across grids",
       with_step({"grids", "seed-report", "independent", "pinned", "lambda", "fixed", "out"}), cmd_converge},
      {"classify", "classify a critical point",
       {"tensors", "seed-report", "kind", "max-order", "gradient-tol", "kernel-ratio", "zero-tol"}, cmd_classify},
      {"export-plot", "write plot data from a hunt report",
       with_step({"report", "figure", "out-dir", "delta", "radius"}), cmd_export_plot},
  };

  CLI::App app{"A-series singularities of semilinear Poisson problems", "aseries"};
  app.require_subcommand(1);
  std::string config_path;
  std::map<std::string, std::map<std::string, std::string>> values;
  std::map<std::string, CLI::App*> subs;
  for (const auto& cmd : commands) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("--config", config_path, "key = value file; flags win over its values");
    auto& v = values[cmd.name];
    std::vector<std::string> keys = common;
    keys.insert(keys.end(), cmd.keys.begin(), cmd.keys.end());
    for (const auto& key : keys) {
      const std::string flag = "--" + key;
      if (std::find(kFlags.begin(), kFlags.end(), key) != kFlags.end())
        sub->add_flag(flag)->description(option_help(key));
      else
        sub->add_option(flag, v[key], option_help(key));
    }
    subs[cmd.name] = sub;
  }

  std::vector<std::string> args;
  for (int i = argc - 1; i >= 1; --i) args.emplace_back(argv[i]);
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  for (const auto& cmd : commands) {
    CLI::App* sub = subs.at(cmd.name);
    if (!sub->parsed()) continue;
    try {
      Settings flags;
      for (const auto& [key, value] : values.at(cmd.name))
        if (sub->count("--" + key)) flags[key] = {value, "--" + key};
      for (const auto& key : kFlags)
        if (sub->get_option_no_throw("--" + key) && sub->count("--" + key)) flags[key] = {"true", "--" + key};
      Settings file;
      if (!config_path.empty()) file = read_config_file(config_path);
      const RunConfig c = make_run_config(merge(file, flags));
      return cmd.fn(c, out, err);
    } catch (const UsageError& e) {
      err << "usage error: " << e.what() << '\n' << "run 'aseries " << cmd.name << " --help' for options\n";
      return 2;
    } catch (const NumericalFailure& e) {
      err << "error: " << e.what() << '\n';
      return 1;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return 1;
    }
  }
  return 2;
}

}  // namespace aseries::cli
