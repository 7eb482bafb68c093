#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <levelk/error.hpp>

namespace levelk::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kSchemaFailure = 2,
  kConfigFailure = 3,
  kContractFailure = 4,
  kIoFailure = 5,
  kArgumentFailure = 6,
  kUsage = 64,
};

int exit_code_for(ErrorKind kind);

/// Parses `args` (without the program name) and runs the selected command.
/// Reports go to `out`, diagnostics to `err`. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace levelk::cli
