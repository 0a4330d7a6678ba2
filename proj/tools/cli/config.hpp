#pragma once

#include "aseries/continuation.hpp"
#include "aseries/harness.hpp"
#include "aseries/poisson.hpp"

#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace aseries::cli {

/// Bad command line or configuration; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A raw value and where it came from ("run.cfg:12" or "--grid").
struct Setting {
  std::string value;
  std::string origin;
};

using Settings = std::map<std::string, Setting>;

/// Keys understood in configuration files; flags use the same names.
const std::vector<std::string>& known_keys();

/// Flat "key = value" text. '#' starts a comment, blank lines are skipped.
/// Errors carry "<name>:<line>:".
Settings read_config(std::istream& is, const std::string& name);
Settings read_config_file(const std::string& path);

/// Flag values win over file values.
Settings merge(Settings file, const Settings& flags);

struct RunConfig {
  std::string problem = "bratu";
  std::vector<double> coefficients;  ///< polynomial c4, c5, ...
  std::optional<Grid> grid;
  Params lambda = Params::Zero();
  bool lambda_given = false;
  Level level = Level::solution;
  std::vector<int> active;  ///< empty selects the level default
  std::vector<EventKind> stop_on;
  StepOptions step = HuntConfig{}.step;
  int max_steps = 400;
  std::uint64_t seed = 1;
  Level target = Level::swallowtail;
  std::vector<int> grids;
  bool independent = false;
  bool pinned = false;
  bool inline_fields = false;
  int max_order = 6;
  Tolerances tolerances;
  double delta = 0.0;
  double radius = GeometryConfig{}.radius;
  std::string figure = "branches";
  std::string kind;  ///< chain entry selected from a report
  std::string out;
  std::string events;
  std::string out_dir;
  std::string start;
  std::string seed_report;
  std::string report;
  std::string tensors;
};

/// Converts and validates; errors name the origin of the offending value.
RunConfig make_run_config(const Settings& s);

Grid parse_grid(const std::string& text);
Params parse_lambda(const std::string& text);
std::vector<int> parse_active(const std::string& text);
/// "10:85:5" (inclusive range) or "10,15,20".
std::vector<int> parse_grid_list(const std::string& text);
std::vector<double> parse_numbers(const std::string& text);
Level parse_level(const std::string& text);
EventKind parse_event_kind(const std::string& text);

std::unique_ptr<Nonlinearity> make_nonlinearity(const RunConfig& c);

}  // namespace aseries::cli
