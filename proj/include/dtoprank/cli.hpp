#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dtoprank::cli {

enum ExitCode : int {
  kSuccess = 0,
  kFailure = 1,
  kValidationError = 2,
  kIoError = 3,
  kProtocolError = 4,
};

// Runs `dtoprank <subcommand> ...`; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dtoprank::cli
