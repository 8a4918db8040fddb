#pragma once

#include <iosfwd>

namespace mementomap::cli {

enum ExitCode : int {
  kOk = 0,
  kNegative = 1,  // valid run, negative answer (lookup miss)
  kUsage = 2,
  kDataError = 3,
};

/// Runs one command line. Data written to "-" and reports go to `out`;
/// diagnostics go to `err` only.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mementomap::cli
