#pragma once

#include <iosfwd>

#include "config.hpp"

namespace pkcli {

enum ExitCode : int { kSuccess = 0, kValidationFailure = 2, kAlgorithmFailure = 3 };

/// Executes a validated configuration and writes its artifacts into the
/// configured output directory. Library errors are reported on `err` and
/// mapped to an exit code.
int run_config(const Json& config, std::ostream& out, std::ostream& err);

}  // namespace pkcli
