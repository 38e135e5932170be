#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace detect::cli {

/// Process exit codes.
enum ExitCode : int {
    kSuccess = 0,
    kInternalError = 1,
    kInputError = 2,   // bad flags, missing or malformed input files, degenerate data
    kLeakDetected = 3, // evaluate was given the bundle's own training set
    kBundleError = 4,  // bundle fails its integrity checks
};

/// Runs `detect <subcommand> ...`. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace detect::cli
