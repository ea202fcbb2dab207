// The csl command-line tool as a library function, so that it can be driven
// from tests without spawning processes.
//
// Exit codes:
//   0  VALID / SAT / true / success
//   1  INVALID / UNSAT / false / suite inconsistency
//   2  bad arguments or unreadable input
//   3  a resource cap was hit before the prover finished

#ifndef CSL_CLI_HPP_
#define CSL_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace csl::cli {

enum ExitCode : int { kOk = 0, kNegative = 1, kError = 2, kResourceCap = 3 };

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace csl::cli

#endif  // CSL_CLI_HPP_
