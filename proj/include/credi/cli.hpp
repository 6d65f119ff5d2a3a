#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace credi {

enum ExitCode : int {
    kExitOk = 0,
    kExitInternal = 1,
    kExitIo = 2,
    kExitSchema = 3,
    kExitConfig = 4,
    kExitBackend = 5,
};

/// Runs the command-line driver. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace credi
