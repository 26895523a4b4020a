#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace exch::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Runs one `exch` invocation. `args` excludes the program name. Results go
/// to `out` unless `--out` names a file; diagnostics go to `err`.
int command_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace exch::cli
