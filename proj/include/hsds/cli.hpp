#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hsds::cli {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
    kOk = 0,
    kCheckFailed = 1,
    kInvalidParams = 2,
    kDegenerateOnly = 3,
    kBracketNotFound = 4,
    kUnwritableOutput = 5,
};

/// Runs one invocation; args excludes the program name. Regular output goes to
/// out unless --out redirects it, diagnostics go to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace hsds::cli
