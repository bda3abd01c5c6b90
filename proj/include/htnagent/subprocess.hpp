#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace htnagent {

struct ProcessOutcome {
  std::string stdout_text;
  std::string stderr_text;
  int exit_status = 0;  // exit code, or 128 + signal number
  double duration_s = 0.0;
  bool timed_out = false;
  bool truncated = false;  // stdout or stderr hit the capture cap
};

struct ProcessOptions {
  std::filesystem::path working_dir;
  /// Complete environment of the child; nothing is inherited.
  std::map<std::string, std::string> env;
  double timeout_s = 30.0;
  /// Per-stream capture cap in bytes; the rest is drained and dropped.
  std::size_t max_capture = 64 * 1024;
};

/// Runs argv[0] (looked up on the child's PATH) in its own process group.
/// On timeout the whole group is killed. Throws ConfigError when the
/// executable cannot be started.
ProcessOutcome run_process(const std::vector<std::string>& argv, const ProcessOptions& opts);

}  // namespace htnagent
