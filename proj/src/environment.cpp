#include "htnagent/environment.hpp"

#include <stdlib.h>

#include <chrono>
#include <cstdlib>
#include <set>
#include <sstream>
#include <system_error>

#include "htnagent/errors.hpp"
#include "htnagent/text.hpp"

namespace htnagent {

namespace fs = std::filesystem;

FileManifest make_manifest(std::string spec_text, std::string request_text,
                           std::optional<std::string> tools_spec_text, bool with_solver,
                           FileManifest extra_files) {
  FileManifest m;
  m.push_back({std::string(paths::kProblemSpec), std::move(spec_text), FileMode::ReadOnly});
  m.push_back({std::string(paths::kRequest), std::move(request_text), FileMode::ReadOnly});
  if (tools_spec_text) {
    m.push_back({std::string(paths::kToolsSpec), std::move(*tools_spec_text), FileMode::ReadOnly});
  }
  m.push_back({std::string(paths::kNotes), "", FileMode::ReadWriteAppend});
  m.push_back({std::string(paths::kAnswer), "", FileMode::ReadWriteAppend});
  if (with_solver) {
    m.push_back({std::string(paths::kSolver), "", FileMode::ReadWriteAppend});
    m.push_back({std::string(paths::kOutput), "", FileMode::ReadOnly});
  }
  for (auto& f : extra_files) m.push_back(std::move(f));
  return m;
}

std::string_view action_name(ActionKind kind) {
  switch (kind) {
    case ActionKind::Read: return "Read";
    case ActionKind::Write: return "Write";
    case ActionKind::Append: return "Append";
    case ActionKind::Verify: return "Verify";
  }
  return "Verify";
}

std::optional<ActionKind> parse_action_kind(std::string_view name) {
  const std::string n = text::to_lower(text::trim(name));
  if (n == "read") return ActionKind::Read;
  if (n == "write") return ActionKind::Write;
  if (n == "append") return ActionKind::Append;
  if (n == "verify") return ActionKind::Verify;
  return std::nullopt;
}

std::string Action::summary() const {
  return std::string(action_name(kind)) + " " + arg1;
}

bool is_safe_workspace_path(std::string_view path) {
  if (path.empty() || path.front() == '/' || path.find('\\') != std::string_view::npos) return false;
  if (path.find('\0') != std::string_view::npos) return false;
  std::size_t start = 0;
  while (start <= path.size()) {
    std::size_t slash = path.find('/', start);
    std::string_view part =
        path.substr(start, slash == std::string_view::npos ? std::string_view::npos : slash - start);
    if (part.empty() || part == "." || part == "..") return false;
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }
  return true;
}

std::string number_lines(std::string_view content) {
  std::string out;
  int n = 1;
  for (const auto& line : text::split_lines(content)) {
    out += std::to_string(n++) + ": " + line + "\n";
  }
  return out;
}

Environment::Environment(const FileManifest& manifest, EnvironmentOptions options)
    : options_(std::move(options)) {
  for (const auto& f : manifest) {
    if (!is_safe_workspace_path(f.path)) throw WorkspaceError("path-escape: " + f.path);
    if (!files_.emplace(f.path, f).second) throw WorkspaceError("duplicate path: " + f.path);
  }

  std::error_code ec;
  fs::create_directories(options_.base_dir, ec);
  std::string tmpl = (options_.base_dir / "ep-XXXXXX").string();
  if (ec || ::mkdtemp(tmpl.data()) == nullptr) {
    throw WorkspaceError("unwritable workspace root: " + options_.base_dir.string());
  }
  root_ = tmpl;
  try {
    for (const auto& [path, entry] : files_) sync(entry);
  } catch (...) {
    fs::remove_all(root_, ec);
    throw;
  }
}

Environment::~Environment() {
  if (!root_.empty() && !options_.keep_workspace) {
    std::error_code ec;
    fs::remove_all(root_, ec);
  }
}

Environment::Environment(Environment&& other) noexcept
    : options_(std::move(other.options_)),
      root_(std::move(other.root_)),
      files_(std::move(other.files_)),
      trace_(std::move(other.trace_)),
      command_log_(std::move(other.command_log_)) {
  other.root_.clear();
}

Environment& Environment::operator=(Environment&& other) noexcept {
  if (this != &other) {
    if (!root_.empty() && !options_.keep_workspace) {
      std::error_code ec;
      fs::remove_all(root_, ec);
    }
    options_ = std::move(other.options_);
    root_ = std::move(other.root_);
    files_ = std::move(other.files_);
    trace_ = std::move(other.trace_);
    command_log_ = std::move(other.command_log_);
    other.root_.clear();
  }
  return *this;
}

void Environment::sync(const FileEntry& entry) const {
  const fs::path target = root_ / entry.path;
  std::error_code ec;
  fs::create_directories(target.parent_path(), ec);
  if (ec) throw WorkspaceError("cannot create " + target.parent_path().string());
  try {
    text::write_file(target.string(), entry.content);
  } catch (const Error& e) {
    throw WorkspaceError(e.what());
  }
}

std::string Environment::content(std::string_view path) const {
  auto it = files_.find(std::string(path));
  return it == files_.end() ? std::string() : it->second.content;
}

std::map<std::string, std::string> Environment::snapshot() const {
  std::map<std::string, std::string> out;
  for (const auto& [path, entry] : files_) out.emplace(path, entry.content);
  return out;
}

StepResult Environment::apply(const Action& action) {
  if (action.kind == ActionKind::Verify) {
    throw InvalidArgument("verify is not an environment transition");
  }
  command_log_.push_back(action.summary());

  StepResult result;
  auto it = files_.find(action.arg1);
  const bool mutating = action.kind != ActionKind::Read;
  if (it == files_.end() || (mutating && it->second.mode != FileMode::ReadWriteAppend)) {
    result.denied = true;
    result.trace = std::string(kAccessDenied);
    trace_ = result.trace;
    return result;
  }
  FileEntry& file = it->second;

  if (action.kind == ActionKind::Read) {
    result.trace = "Contents of " + file.path + ":\n" + number_lines(file.content);
    if (options_.read_copies_to_notes && file.path != paths::kNotes) {
      auto notes = files_.find(std::string(paths::kNotes));
      if (notes != files_.end()) {
        notes->second.content += file.content;
        sync(notes->second);
      }
    }
    trace_ = result.trace;
    return result;
  }

  if (action.kind == ActionKind::Write) file.content.clear();
  file.content += action.arg2;
  sync(file);
  result.trace = "Updated " + file.path + ":\n" + file.content + "\n";

  if (file.path == paths::kSolver) {
    const double t0 = now();
    SolverOutcome outcome = execute_solver();
    result.solver_seconds = now() - t0;
    result.trace += solver_trace(outcome);
    result.solver = std::move(outcome);
  }
  trace_ = result.trace;
  return result;
}

double Environment::now() const {
  if (options_.clock) return options_.clock();
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

std::string Environment::solver_trace(const SolverOutcome& outcome) const {
  std::string t = "Code executed with stdout:\n" + outcome.stdout_text;
  if (!outcome.stderr_text.empty()) {
    if (!t.empty() && t.back() != '\n') t += "\n";
    t += "Code executed with stderr:\n" + outcome.stderr_text;
  }
  if (outcome.timed_out) {
    if (!t.empty() && t.back() != '\n') t += "\n";
    std::ostringstream ss;
    ss << "Code execution timed out after " << options_.solver.timeout_s << " seconds\n";
    t += ss.str();
  }
  return t;
}

SolverOutcome Environment::execute_solver() {
  if (!has_file(paths::kSolver)) throw InvalidArgument("workspace has no solver file");
  ProcessOptions popts;
  popts.working_dir = root_;
  popts.timeout_s = options_.solver.timeout_s;
  popts.max_capture = options_.solver.max_output_bytes;
  if (const char* path = std::getenv("PATH")) popts.env["PATH"] = path;
  popts.env["HOME"] = root_.string();
  popts.env["PYTHONDONTWRITEBYTECODE"] = "1";
  popts.env["PYTHONIOENCODING"] = "utf-8";

  std::vector<std::string> argv = options_.solver.interpreter;
  if (argv.empty()) throw ConfigError("solver interpreter not configured");
  argv.emplace_back(paths::kSolver);
  SolverOutcome outcome = run_process(argv, popts);

  auto out = files_.find(std::string(paths::kOutput));
  if (out != files_.end()) {
    std::string combined = outcome.stdout_text + outcome.stderr_text;
    if (combined.size() > options_.solver.max_output_bytes) {
      combined.resize(options_.solver.max_output_bytes);
    }
    out->second.content = std::move(combined);
    sync(out->second);
  }
  return outcome;
}

void RewardConfig::validate() const {
  if (!(r_success > 0)) throw InvalidArgument("r_success must be positive");
  if (!(r_step <= 0)) throw InvalidArgument("r_step must be non-positive");
  if (horizon < 1) throw InvalidArgument("horizon must be at least 1");
}

double cumulative_reward(bool success, int steps, const RewardConfig& cfg) {
  if (steps <= 0) return 0.0;
  if (success) return cfg.r_success + cfg.r_step * static_cast<double>(steps - 1);
  return cfg.r_step * static_cast<double>(steps);
}

}  // namespace htnagent
