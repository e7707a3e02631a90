#ifndef INTRADAY_CLI_HPP_
#define INTRADAY_CLI_HPP_

#include <iosfwd>

namespace intraday::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitIo = 3;

/// Runs one subcommand (gen, update, sample, evaluate, tune-k). Data goes to
/// files or `out`, diagnostics to `err`. Returns the process exit code.
int run(int argc, const char *const *argv, std::ostream &out,
        std::ostream &err);

} // namespace intraday::cli

#endif // INTRADAY_CLI_HPP_
