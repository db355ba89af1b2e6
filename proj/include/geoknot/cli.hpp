#pragma once

#include <string>
#include <vector>

namespace geoknot {

enum ExitStatus : int {
    kExitOk = 0,
    kExitMismatch = 1,
    kExitUsage = 2,
    kExitIo = 3,
    kExitPartial = 4,
};

/// Parses argv and runs one of: sample, analyze, verify, probe, tau, writhe-matrix.
int cli_dispatch(int argc, const char* const* argv);
/// Same, with args[0] as the program name.
int cli_dispatch(const std::vector<std::string>& args);

}  // namespace geoknot
