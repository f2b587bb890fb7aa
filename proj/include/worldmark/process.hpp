#pragma once

// Child-process helpers (POSIX). Two flavors: capture (stdin/stdout piped,
// for scorer subprocesses) and redirect (stdout+stderr into a log file, for
// model runners).

#include <optional>
#include <string>
#include <vector>

#include "worldmark/common.hpp"

namespace worldmark::proc {

struct Result {
    int exit_code = -1;
    bool timed_out = false;
    bool signaled = false;
    std::string output;  // captured stdout (capture flavor only)
};

/// Run `argv`, write `stdin_data` to its stdin, capture stdout.
/// On timeout the child is killed and timed_out is set.
Result run_capture(const std::vector<std::string>& argv,
                   const std::string& stdin_data, double timeout_seconds);

/// Run `argv` with stdout and stderr appended to `log_path`.
Result run_redirected(const std::vector<std::string>& argv,
                      const fs::path& log_path, double timeout_seconds);

}  // namespace worldmark::proc
