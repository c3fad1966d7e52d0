#pragma once

#include <ostream>

namespace boltshare::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kIo = 3,
  kSchema = 4,
  kDomain = 5,
  kInternal = 6,
};

/// Runs one subcommand. Results go to `out`; logs and the error document go
/// to `err`.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace boltshare::cli
