#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace econevo::cli {

enum ExitCode : int { kSuccess = 0, kUsage = 1, kDomainFailure = 2 };

/// Runs one command line (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace econevo::cli
