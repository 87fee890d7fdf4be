#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace varcoef::cli {

/// Exit statuses of run().
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitSingular = 3;

/// Runs one subcommand. `args` excludes the program name. Results go to
/// `out` (or to --out, written atomically), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace varcoef::cli
