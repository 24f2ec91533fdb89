#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace musem {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // metric undefined, gradient check failed
inline constexpr int kExitInput = 2;    // bad input, flags or configuration

/// Entry point shared by the `musem` binary and the tests. `args` excludes
/// the program name. Commands: train, eval, predict, gradcheck,
/// attention-dump, ingest-stats.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace musem
