#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rtsim::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,          // bad flags, unreadable or unwritable files
  kInvalidConfig = 2,  // parse or validation failure
  kInternal = 3,       // engine invariant breach
  kGuard = 4,          // instance beyond the oracle guard
  kMismatch = 5,       // engine and oracle disagree
};

/// Entry point shared by the binary and the tests. `args` excludes argv[0].
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rtsim::cli
