#pragma once

#include <string>
#include <vector>

namespace offlang::commands {

// Entry point behind the CLI binary. argv[0] names one of:
//   preprocess | augment | train | eval | explain | report
// Exit codes: 0 success, 1 runtime/config error, 2 usage error.
int run_command(const std::vector<std::string>& argv);

}  // namespace offlang::commands
