#pragma once

#include "config.hpp"

#include <iosfwd>
#include <stdexcept>

namespace aseries::cli {

/// A solver did not deliver what the command promised; maps to exit code 1.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Each command returns its exit code. Usage problems throw UsageError,
/// solver problems NumericalFailure; `run` maps both.
int cmd_continue(const RunConfig& c, std::ostream& out, std::ostream& err);
int cmd_hunt(const RunConfig& c, std::ostream& out, std::ostream& err);
int cmd_converge(const RunConfig& c, std::ostream& out, std::ostream& err);
int cmd_classify(const RunConfig& c, std::ostream& out, std::ostream& err);
int cmd_export_plot(const RunConfig& c, std::ostream& out, std::ostream& err);

/// Full command line: 0 success, 1 numerical failure, 2 usage or config error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace aseries::cli
