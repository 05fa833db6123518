#pragma once

#include <string>
#include <vector>

namespace hfprep {

// Dispatches one CLI invocation (args exclude the program name).
// Exit codes: 0 success, 1 runtime failure, 2 usage error.
int run_pipeline(const std::vector<std::string>& args);

} // namespace hfprep
