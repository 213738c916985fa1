#pragma once

#include <iosfwd>

namespace pkcli {

/// Entry point of the pomp-kit executable; returns the process exit code.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pkcli
