#pragma once

#include <chrono>
#include <filesystem>
#include <string>

namespace intentc {

struct ExecResult {
  int exit_code = -1;
  bool timed_out = false;
  std::string stdout_text;
  std::string stderr_text;
  std::chrono::milliseconds wall{0};
};

// Runs `command` under /bin/sh in its own process group inside `cwd`,
// killing the whole group at the deadline. Network isolation is attempted
// via an unprivileged user+net namespace and silently skipped where the
// kernel forbids it. Throws SandboxUnavailable when the process cannot be
// spawned at all.
ExecResult run_sandboxed(const std::string& command, std::chrono::milliseconds timeout,
                         const std::filesystem::path& cwd);

}  // namespace intentc
