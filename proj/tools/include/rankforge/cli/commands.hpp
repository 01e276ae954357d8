#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rankforge::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,      // bad flags or config
  kExitData = 2,       // unreadable or inconsistent input files
  kExitNumerical = 3,  // divergence or failed gradient check
};

/// Runs `rankforge <args...>`; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rankforge::cli
