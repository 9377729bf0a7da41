#pragma once

#include <iosfwd>

namespace mixcal {

// Exit statuses of the mixcal command.
enum ExitCode : int {
  exit_ok = 0,
  exit_config_error = 2,  // bad config, bad flags or arguments
  exit_not_converged = 3,
  exit_io_error = 4,
};

// Entry point of the `mixcal` tool (scan, calibrate, sweep, store list).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mixcal
