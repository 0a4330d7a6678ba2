#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace aseries::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || s.empty()) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

long long to_integer(const std::string& s) {
  long long v = 0;
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || s.empty()) throw std::invalid_argument("not an integer: '" + s + "'");
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw std::invalid_argument("not a boolean: '" + s + "'");
}

int parameter_index(const std::string& s) {
  if (s == "l1" || s == "lambda1") return 0;
  if (s == "l2" || s == "lambda2") return 1;
  if (s == "l3" || s == "lambda3") return 2;
  throw std::invalid_argument("unknown parameter '" + s + "' (expected l1, l2 or l3)");
}

}  // namespace

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys{
      "problem", "coefficients", "grid",   "lambda",      "fixed",      "level",      "active",
      "stop-on", "ds0",          "ds-min", "ds-max",      "max-steps",  "tol",        "max-iter",
      "event-tol", "seed",       "target", "grids",       "independent", "pinned",    "inline",
      "max-order", "gradient-tol", "kernel-ratio", "zero-tol", "delta", "radius",     "figure",
      "kind",    "out",          "events", "out-dir",     "start",      "seed-report", "report",
      "tensors"};
  return keys;
}

Settings read_config(std::istream& is, const std::string& name) {
  Settings out;
  std::string line;
  int lineno = 0;
  const auto& keys = known_keys();
  while (std::getline(is, line)) {
    ++lineno;
    const std::string where = name + ":" + std::to_string(lineno);
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(where + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw UsageError(where + ": missing key");
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw UsageError(where + ": unknown key '" + key + "'");
    if (out.count(key)) throw UsageError(where + ": duplicate key '" + key + "'");
    out[key] = {value, where};
  }
  return out;
}

Settings read_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw UsageError("cannot open configuration file " + path);
  return read_config(is, path);
}

Settings merge(Settings file, const Settings& flags) {
  for (const auto& [k, v] : flags) file[k] = v;
  return file;
}

Grid parse_grid(const std::string& text) {
  const auto x = text.find('x');
  const long long n = to_integer(trim(text.substr(0, x)));
  const long long m = x == std::string::npos ? n : to_integer(trim(text.substr(x + 1)));
  if (n < 1 || m < 1) throw std::invalid_argument("grid sizes must be at least 1");
  return Grid(static_cast<int>(n), static_cast<int>(m));
}

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  for (const auto& item : split(text, ',')) out.push_back(to_double(item));
  return out;
}

Params parse_lambda(const std::string& text) {
  const auto v = parse_numbers(text);
  if (v.size() != 3) throw std::invalid_argument("lambda needs three comma-separated values");
  return Params(v[0], v[1], v[2]);
}

std::vector<int> parse_active(const std::string& text) {
  std::vector<int> out;
  for (const auto& item : split(text, ',')) {
    const int i = parameter_index(item);
    if (std::find(out.begin(), out.end(), i) != out.end())
      throw std::invalid_argument("parameter '" + item + "' listed twice");
    out.push_back(i);
  }
  if (out.empty()) throw std::invalid_argument("active set is empty");
  return out;
}

std::vector<int> parse_grid_list(const std::string& text) {
  std::vector<int> out;
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw std::invalid_argument("grid range must be first:last:step");
    const long long a = to_integer(parts[0]), b = to_integer(parts[1]), h = to_integer(parts[2]);
    if (a < 1 || h < 1 || b < a) throw std::invalid_argument("invalid grid range '" + text + "'");
    for (long long n = a; n <= b; n += h) out.push_back(static_cast<int>(n));
  } else {
    for (const auto& item : split(text, ',')) {
      const long long n = to_integer(item);
      if (n < 1) throw std::invalid_argument("grid sizes must be at least 1");
      out.push_back(static_cast<int>(n));
    }
  }
  if (out.empty()) throw std::invalid_argument("empty grid list");
  return out;
}

Level parse_level(const std::string& text) {
  if (text == "0" || text == "solution") return Level::solution;
  if (text == "1" || text == "fold") return Level::fold;
  if (text == "2" || text == "cusp") return Level::cusp;
  if (text == "3" || text == "swallowtail") return Level::swallowtail;
  throw std::invalid_argument("unknown level '" + text + "'");
}

EventKind parse_event_kind(const std::string& text) {
  if (text == "fold") return EventKind::fold;
  if (text == "cusp") return EventKind::cusp;
  if (text == "swallowtail") return EventKind::swallowtail;
  if (text == "butterfly") return EventKind::butterfly;
  if (text == "blowup") return EventKind::blowup;
  throw std::invalid_argument("unknown event kind '" + text + "'");
}

RunConfig make_run_config(const Settings& s) {
  RunConfig c;
  std::string current;
  auto has = [&](const char* k) { return s.count(k) > 0; };
  auto get = [&](const char* k) -> const std::string& {
    current = k;
    return s.at(k).value;
  };
  try {
    if (has("problem")) {
      c.problem = get("problem");
      if (c.problem != "bratu" && c.problem != "polynomial")
        throw std::invalid_argument("problem must be 'bratu' or 'polynomial'");
    }
    if (has("coefficients")) c.coefficients = parse_numbers(get("coefficients"));
    if (has("grid")) c.grid = parse_grid(get("grid"));
    if (has("lambda")) {
      c.lambda = parse_lambda(get("lambda"));
      c.lambda_given = true;
    }
    if (has("fixed")) {
      for (const auto& item : split(get("fixed"), ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("fixed entries look like l3=0");
        c.lambda[parameter_index(trim(item.substr(0, eq)))] = to_double(trim(item.substr(eq + 1)));
      }
      c.lambda_given = true;
    }
    if (has("level")) c.level = parse_level(get("level"));
    if (has("active")) c.active = parse_active(get("active"));
    if (has("stop-on"))
      for (const auto& item : split(get("stop-on"), ',')) c.stop_on.push_back(parse_event_kind(item));
    if (has("ds0")) c.step.ds0 = to_double(get("ds0"));
    if (has("ds-min")) c.step.ds_min = to_double(get("ds-min"));
    if (has("ds-max")) c.step.ds_max = to_double(get("ds-max"));
    if (has("max-steps")) c.max_steps = static_cast<int>(to_integer(get("max-steps")));
    if (has("tol")) c.step.newton.tol = to_double(get("tol"));
    if (has("max-iter")) c.step.newton.max_iter = static_cast<int>(to_integer(get("max-iter")));
    if (has("event-tol")) c.step.event_tol = to_double(get("event-tol"));
    if (has("seed")) {
      const long long seed = to_integer(get("seed"));
      if (seed < 0) throw std::invalid_argument("seed must be non-negative");
      c.seed = static_cast<std::uint64_t>(seed);
    }
    if (has("target")) c.target = parse_level(get("target"));
    if (has("grids")) c.grids = parse_grid_list(get("grids"));
    if (has("independent")) c.independent = to_bool(get("independent"));
    if (has("pinned")) c.pinned = to_bool(get("pinned"));
    if (has("inline")) c.inline_fields = to_bool(get("inline"));
    if (has("max-order")) c.max_order = static_cast<int>(to_integer(get("max-order")));
    if (has("gradient-tol")) c.tolerances.gradient = to_double(get("gradient-tol"));
    if (has("kernel-ratio")) c.tolerances.kernel_ratio = to_double(get("kernel-ratio"));
    if (has("zero-tol")) c.tolerances.zero_test = to_double(get("zero-tol"));
    if (has("delta")) c.delta = to_double(get("delta"));
    if (has("radius")) c.radius = to_double(get("radius"));
    if (has("figure")) {
      c.figure = get("figure");
      if (c.figure != "branches" && c.figure != "geometry")
        throw std::invalid_argument("figure must be 'branches' or 'geometry'");
    }
    if (has("kind")) c.kind = get("kind");
    if (has("out")) c.out = get("out");
    if (has("events")) c.events = get("events");
    if (has("out-dir")) c.out_dir = get("out-dir");
    if (has("start")) c.start = get("start");
    if (has("seed-report")) c.seed_report = get("seed-report");
    if (has("report")) c.report = get("report");
    if (has("tensors")) c.tensors = get("tensors");

    current.clear();
    const StepOptions& st = c.step;
    if (!(st.ds_min > 0 && st.ds_min <= st.ds0 && st.ds0 <= st.ds_max))
      throw std::invalid_argument("step sizes need 0 < ds-min <= ds0 <= ds-max");
    if (!(st.newton.tol > 0) || !(st.event_tol > 0)) throw std::invalid_argument("tolerances must be positive");
    if (st.newton.max_iter < 1) throw std::invalid_argument("max-iter must be at least 1");
    if (c.max_steps < 0) throw std::invalid_argument("max-steps must be non-negative");
    if (!(c.tolerances.gradient > 0) || !(c.tolerances.kernel_ratio > 0) || !(c.tolerances.zero_test > 0))
      throw std::invalid_argument("tolerances must be positive");
    if (c.max_order < 3 || c.max_order > 12) throw std::invalid_argument("max-order must lie in [3, 12]");
  } catch (const std::invalid_argument& e) {
    const std::string where = current.empty() ? "configuration" : s.at(current).origin;
    throw UsageError(where + ": " + e.what());
  }
  return c;
}

std::unique_ptr<Nonlinearity> make_nonlinearity(const RunConfig& c) {
  if (c.problem == "polynomial") return std::make_unique<PolynomialNonlinearity>(c.coefficients);
  return std::make_unique<BratuNonlinearity>();
}

}  // namespace aseries::cli
