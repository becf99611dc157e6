#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace emobias {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitIncomplete = 2,
  kExitData = 3,
};

// Runs the `emobias` command line. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace emobias
