#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace freqmosaic::cli {

enum ExitCode : int {
  ok = 0,
  usage = 1,
  io_error = 2,
  contract_violation = 3,
  corrupt_checkpoint = 4,
};

/// Runs the command line `args` (without the program name). Normal output
/// goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace freqmosaic::cli
