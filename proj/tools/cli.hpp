#ifndef OULDP_TOOLS_CLI_HPP
#define OULDP_TOOLS_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace ouldp::cli {

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { kOk = 0, kDomainFailure = 1, kUsageError = 2 };

/// Runs one command line (args excludes the program name). Results go to
/// `out` as a single JSON object (or CSV for sweeps without --csv); usage
/// errors go to `err`.
int execute(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Formats a value for CSV cells: 12 significant digits, inf/-inf/nan.
std::string format_csv_number(double v);

}  // namespace ouldp::cli

#endif  // OULDP_TOOLS_CLI_HPP
