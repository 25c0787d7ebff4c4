#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace outformation::cli {

enum ExitCode : int {
    kOk = 0,
    kVerifyFailed = 1,
    kUsage = 2,
    kRuntime = 3,
    kConditioning = 4,
    kOverwrite = 5,
};

/// Entry point of the `outformation` tool. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace outformation::cli
