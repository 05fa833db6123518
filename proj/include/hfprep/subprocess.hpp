#pragma once

#include <cstdint>
#include <string>

namespace hfprep {

struct CommandResult {
    int exit_code = -1;   // negative = terminated by signal -exit_code
    bool timed_out = false;
    std::string out;         // captured stdout
    std::string stderr_tail; // last few KB of stderr
};

// Runs `shell_cmd` via /bin/sh -c, capturing stdout and stderr.
// timeout_s <= 0 means no timeout; on expiry the child process group is
// killed with SIGKILL.
CommandResult run_command(const std::string& shell_cmd, double timeout_s);

// Number of run_command invocations in this process; tests use it to
// assert cache hits spawn nothing.
uint64_t command_invocation_count();

} // namespace hfprep
