#pragma once

// The agent's world: a permissioned file workspace with read/write/append
// transitions, a trace of the last action, and optional execution of an
// agent-authored solver script.

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "htnagent/subprocess.hpp"

namespace htnagent {

namespace paths {
inline constexpr std::string_view kSolver = "solver.py";
inline constexpr std::string_view kNotes = "files/notes.txt";
inline constexpr std::string_view kAnswer = "answer.txt";
inline constexpr std::string_view kRequest = "files/request.txt";
inline constexpr std::string_view kProblemSpec = "files/problem_specification.txt";
inline constexpr std::string_view kToolsSpec = "files/tools_specification.txt";
inline constexpr std::string_view kOutput = "output.txt";
}  // namespace paths

inline constexpr std::string_view kAccessDenied = "file access denied";

enum class FileMode { ReadOnly, ReadWriteAppend };

struct FileEntry {
  std::string path;
  std::string content;
  FileMode mode = FileMode::ReadOnly;
};

using FileManifest = std::vector<FileEntry>;

/// Standard workspace: problem spec, request, notes, answer; plus the tools
/// spec when given, plus solver.py/output.txt when `with_solver`. Extra
/// read-only files (tool sources, data) are appended as-is.
FileManifest make_manifest(std::string spec_text, std::string request_text,
                           std::optional<std::string> tools_spec_text = std::nullopt,
                           bool with_solver = false, FileManifest extra_files = {});

enum class ActionKind { Read, Write, Append, Verify };

std::string_view action_name(ActionKind kind);  // "Read", "Write", ...
/// Case-insensitive.
std::optional<ActionKind> parse_action_kind(std::string_view name);

struct Action {
  ActionKind kind = ActionKind::Verify;
  std::string arg1;  // path
  std::string arg2;  // content

  static Action read(std::string path) { return {ActionKind::Read, std::move(path), {}}; }
  static Action write(std::string path, std::string content) {
    return {ActionKind::Write, std::move(path), std::move(content)};
  }
  static Action append(std::string path, std::string content) {
    return {ActionKind::Append, std::move(path), std::move(content)};
  }
  static Action verify() { return {ActionKind::Verify, {}, {}}; }

  /// Command-log line, e.g. "Read files/request.txt" or "Verify ".
  std::string summary() const;

  friend bool operator==(const Action&, const Action&) = default;
};

struct SolverConfig {
  std::vector<std::string> interpreter{"python3"};
  double timeout_s = 30.0;
  std::size_t max_output_bytes = 64 * 1024;
};

using SolverOutcome = ProcessOutcome;

struct EnvironmentOptions {
  /// Literal "read copies the file into Notes" semantics. Off by default.
  bool read_copies_to_notes = false;
  SolverConfig solver;
  /// Episode roots are created below this directory.
  std::filesystem::path base_dir = std::filesystem::temp_directory_path() / "htnagent";
  /// Keep the episode root on disk after the Environment is destroyed.
  bool keep_workspace = false;
  /// Seconds source for solver timing in StepResult; steady clock when empty.
  std::function<double()> clock;
};

struct StepResult {
  std::string trace;
  std::optional<SolverOutcome> solver;
  /// Time spent in the solver, measured with EnvironmentOptions::clock.
  double solver_seconds = 0.0;
  bool denied = false;
};

/// One episode's workspace. Files live in memory and are mirrored under an
/// episode-unique root directory, which is removed on destruction.
class Environment {
 public:
  /// Throws WorkspaceError on duplicate or escaping paths, or when the root
  /// cannot be created.
  Environment(const FileManifest& manifest, EnvironmentOptions options = {});
  ~Environment();
  Environment(const Environment&) = delete;
  Environment& operator=(const Environment&) = delete;
  Environment(Environment&&) noexcept;
  Environment& operator=(Environment&&) noexcept;

  /// Applies a read/write/append. Permission problems come back as the
  /// "file access denied" trace. Throws InvalidArgument for verify.
  StepResult apply(const Action& action);

  /// Runs the solver file. Throws ConfigError if the interpreter is missing
  /// and InvalidArgument if the workspace has no solver.
  SolverOutcome execute_solver();

  const std::map<std::string, FileEntry>& files() const noexcept { return files_; }
  bool has_file(std::string_view path) const { return files_.count(std::string(path)) != 0; }
  /// Empty string for unknown paths.
  std::string content(std::string_view path) const;
  std::map<std::string, std::string> snapshot() const;

  const std::string& trace() const noexcept { return trace_; }
  /// Verify feedback and parse errors also become the trace.
  void set_trace(std::string trace) { trace_ = std::move(trace); }

  const std::vector<std::string>& command_log() const noexcept { return command_log_; }
  int step_count() const noexcept { return static_cast<int>(command_log_.size()); }
  const std::filesystem::path& root() const noexcept { return root_; }
  const EnvironmentOptions& options() const noexcept { return options_; }

 private:
  void sync(const FileEntry& entry) const;
  double now() const;
  std::string solver_trace(const SolverOutcome& outcome) const;

  EnvironmentOptions options_;
  std::filesystem::path root_;
  std::map<std::string, FileEntry> files_;
  std::string trace_;
  std::vector<std::string> command_log_;
};

/// Rejects absolute paths, "." / ".." components and empty components.
bool is_safe_workspace_path(std::string_view path);

/// "N: line" per line, 1-based.
std::string number_lines(std::string_view content);

struct RewardConfig {
  double r_success = 1.0;
  double r_step = -0.1;
  int horizon = 100;

  /// Throws InvalidArgument unless r_success > 0, r_step <= 0, horizon >= 1.
  void validate() const;
};

/// Terminal step earns r_success, every other step r_step.
double cumulative_reward(bool success, int steps, const RewardConfig& cfg);

}  // namespace htnagent
