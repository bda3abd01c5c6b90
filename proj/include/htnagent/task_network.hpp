#pragma once

// Totally-ordered HTN method libraries and the live task stack that the
// agent loop consumes.
//
// A method maps one task name to an ordered list of subtasks and carries the
// natural-language effect (plus the files holding the evidence) that the
// verifier checks before the task is popped. Methods have no preconditions.

#include <cstddef>
#include <deque>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace htnagent {

/// Trim + ASCII case fold. Task matching is done on this form.
std::string normalize_task_name(std::string_view name);

class TaskName {
 public:
  /// Throws InvalidArgument when `text` is blank. Surrounding whitespace is dropped.
  explicit TaskName(std::string_view text);

  const std::string& str() const noexcept { return text_; }
  std::string key() const { return normalize_task_name(text_); }
  bool matches(const TaskName& other) const { return key() == other.key(); }

  friend bool operator==(const TaskName& a, const TaskName& b) { return a.text_ == b.text_; }

 private:
  std::string text_;
};

struct Method {
  std::string id;
  TaskName task;
  std::vector<TaskName> subtasks;  // execution order; empty for primitive tasks
  std::string effect;
  std::vector<std::string> effect_files;

  bool is_primitive() const noexcept { return subtasks.empty(); }
};

/// Which way "subtaskN" keys map to execution order.
enum class SubtaskOrder { Ascending, Descending };

struct ValidationReport {
  /// Each cycle is the set of task names of one strongly connected component.
  std::vector<std::vector<std::string>> cycles;
  /// Subtask names with no relevant method; they run as primitive leaves
  /// verified against their parent's effect.
  std::vector<std::string> dangling_subtasks;
  /// Task names claimed by more than one method (only the first is ever used).
  std::vector<std::string> duplicate_tasks;
  /// (method id, path) pairs whose effect file is not a known workspace file.
  std::vector<std::pair<std::string, std::string>> unknown_effect_files;

  bool has_errors() const noexcept { return !cycles.empty(); }
  std::vector<std::string> messages() const;
};

class MethodLibrary {
 public:
  MethodLibrary() = default;
  /// Throws LibraryFormatError on duplicate method ids.
  explicit MethodLibrary(std::vector<Method> methods);

  const std::vector<Method>& methods() const noexcept { return methods_; }
  std::size_t size() const noexcept { return methods_.size(); }
  bool empty() const noexcept { return methods_.empty(); }
  const Method& at(std::size_t i) const { return methods_.at(i); }

  /// Index of the first method (file order) whose task matches, if any.
  std::optional<std::size_t> first_relevant(const TaskName& task) const;

  /// Load-time lint (dangling subtasks, duplicate task names, cycles).
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

 private:
  friend MethodLibrary load_method_library(std::string_view, SubtaskOrder);
  std::vector<Method> methods_;
  std::vector<std::string> warnings_;
};

/// Parses the object-of-methods layout:
///   {"method1": {"task": ..., "subtasks": {"subtask1": ...}, "effect": ...,
///                "effect_files": {"file1": ...}}, ...}
/// Method file order is preserved. Throws LibraryFormatError.
MethodLibrary load_method_library(std::string_view text,
                                  SubtaskOrder order = SubtaskOrder::Ascending);
MethodLibrary load_method_library_file(const std::filesystem::path& path,
                                       SubtaskOrder order = SubtaskOrder::Ascending);

/// Serializes back to the same layout (ascending subtask numbering).
std::string dump_method_library(const MethodLibrary& lib);

/// nullptr when no method is relevant.
const Method* find_first_relevant_method(const TaskName& task, const MethodLibrary& lib);

/// `known_files`, when given, enables the effect-file path check.
ValidationReport validate_library(const MethodLibrary& lib,
                                  const std::optional<std::set<std::string>>& known_files = {});

struct StackEntry {
  TaskName task;
  /// Method whose effect verifies this entry: its own relevant method, or the
  /// parent's governing method for leaves that have none.
  std::optional<std::size_t> governing;
  bool has_own_method = false;
  /// Set once the entry's method has prepended its subtasks.
  bool decomposed = false;
};

/// Totally-ordered task sequence; front() is the current task.
class TaskStack {
 public:
  TaskStack() = default;

  /// A one-entry stack for `root`, with its governing method looked up in `lib`.
  static TaskStack single(const TaskName& root, const MethodLibrary& lib);

  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }
  const StackEntry& head() const { return entries_.front(); }
  const std::deque<StackEntry>& entries() const noexcept { return entries_; }
  std::vector<std::string> task_names() const;

  /// The stack without its head. Precondition: !empty().
  TaskStack popped() const;

  friend TaskStack update_task(TaskStack stack, const MethodLibrary& lib, int max_depth);

 private:
  std::deque<StackEntry> entries_;
};

inline constexpr int kDefaultMaxDecompositionDepth = 64;

/// Decomposes the head until it is primitive, has no relevant method, or has
/// already been decomposed. Parents stay below their subtasks.
/// Throws DecompositionDepthExceeded after `max_depth` nested decompositions.
TaskStack update_task(TaskStack stack, const MethodLibrary& lib,
                      int max_depth = kDefaultMaxDecompositionDepth);

/// Method used to verify the head of `stack`, or nullptr.
const Method* governing_method(const TaskStack& stack, const MethodLibrary& lib);

}  // namespace htnagent
