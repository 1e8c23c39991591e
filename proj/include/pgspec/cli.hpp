#pragma once

#include <ostream>

namespace pgspec {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitAudit = 3;

// Subcommands analyze, compare, bench, gen and explore. Results go to --out when given, otherwise
// to `out`; diagnostics go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pgspec
