#include "htnagent/task_network.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <map>
#include <unordered_map>

#include <json.hpp>

#include "htnagent/errors.hpp"
#include "htnagent/text.hpp"

namespace htnagent {

using ojson = nlohmann::ordered_json;

std::string normalize_task_name(std::string_view name) {
  return text::to_lower(text::trim(name));
}

TaskName::TaskName(std::string_view text) : text_(text::trim(text)) {
  if (text_.empty()) throw InvalidArgument("task name must not be blank");
}

MethodLibrary::MethodLibrary(std::vector<Method> methods) : methods_(std::move(methods)) {
  std::set<std::string> ids;
  for (const auto& m : methods_) {
    if (!ids.insert(m.id).second) throw LibraryFormatError("duplicate method id: " + m.id);
  }
}

std::optional<std::size_t> MethodLibrary::first_relevant(const TaskName& task) const {
  const std::string key = task.key();
  for (std::size_t i = 0; i < methods_.size(); ++i) {
    if (methods_[i].task.key() == key) return i;
  }
  return std::nullopt;
}

namespace {

// Parses "<prefix><N>" with N >= 1.
std::optional<int> numbered_key(std::string_view key, std::string_view prefix) {
  if (key.substr(0, prefix.size()) != prefix) return std::nullopt;
  std::string_view digits = key.substr(prefix.size());
  if (digits.empty() || digits.front() == '0') return std::nullopt;
  int n = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) return std::nullopt;
  return n;
}

std::vector<std::string> numbered_values(const ojson& node, std::string_view prefix,
                                         const std::string& method_id, const char* field) {
  std::vector<std::string> out;
  if (node.is_array()) {
    for (const auto& v : node) {
      if (!v.is_string()) {
        throw LibraryFormatError(std::string("non-string entry in '") + field + "' of " + method_id);
      }
      out.push_back(v.get<std::string>());
    }
    return out;
  }
  if (!node.is_object()) {
    throw LibraryFormatError(std::string("field '") + field + "' of " + method_id +
                             " must be an object");
  }
  std::map<int, std::string> by_number;
  for (const auto& [key, value] : node.items()) {
    auto n = numbered_key(key, prefix);
    if (!n) {
      throw LibraryFormatError("unexpected key '" + key + "' in '" + field + "' of " + method_id);
    }
    if (!value.is_string()) {
      throw LibraryFormatError("non-string value for '" + key + "' in " + method_id);
    }
    by_number[*n] = value.get<std::string>();
  }
  int expected = 1;
  for (auto& [n, value] : by_number) {
    if (n != expected) {
      throw LibraryFormatError(std::string("non-contiguous ") + std::string(prefix) +
                               " numbering in " + method_id);
    }
    out.push_back(std::move(value));
    ++expected;
  }
  return out;
}

std::string required_string(const ojson& m, const char* field, const std::string& id) {
  auto it = m.find(field);
  if (it == m.end()) {
    throw LibraryFormatError(std::string("missing required field '") + field + "' in " + id);
  }
  if (!it->is_string()) {
    throw LibraryFormatError(std::string("field '") + field + "' in " + id + " must be a string");
  }
  return it->get<std::string>();
}

}  // namespace

MethodLibrary load_method_library(std::string_view text, SubtaskOrder order) {
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const ojson::parse_error& e) {
    throw LibraryFormatError(std::string("malformed document: ") + e.what());
  }
  if (!doc.is_object()) throw LibraryFormatError("malformed document: top level must be an object");

  std::vector<Method> methods;
  for (const auto& [id, m] : doc.items()) {
    if (!m.is_object()) throw LibraryFormatError("malformed document: " + id + " is not an object");

    std::string task = required_string(m, "task", id);
    if (text::trim(task).empty()) throw LibraryFormatError("empty task name in " + id);
    std::string effect = required_string(m, "effect", id);
    if (text::trim(effect).empty()) throw LibraryFormatError("empty effect in " + id);

    auto files_it = m.find("effect_files");
    if (files_it == m.end()) {
      throw LibraryFormatError("missing required field 'effect_files' in " + id);
    }
    auto files = numbered_values(*files_it, "file", id, "effect_files");
    if (files.empty()) throw LibraryFormatError("empty effect_files in " + id);

    std::vector<TaskName> subtasks;
    if (auto sub_it = m.find("subtasks"); sub_it != m.end() && !sub_it->is_null()) {
      for (const auto& s : numbered_values(*sub_it, "subtask", id, "subtasks")) {
        if (text::trim(s).empty()) throw LibraryFormatError("blank subtask name in " + id);
        subtasks.emplace_back(s);
      }
      if (order == SubtaskOrder::Descending) std::reverse(subtasks.begin(), subtasks.end());
    }

    methods.push_back(Method{id, TaskName(task), std::move(subtasks), std::move(effect),
                             std::move(files)});
  }

  MethodLibrary lib(std::move(methods));
  lib.warnings_ = validate_library(lib).messages();
  return lib;
}

MethodLibrary load_method_library_file(const std::filesystem::path& path, SubtaskOrder order) {
  return load_method_library(text::read_file(path.string()), order);
}

std::string dump_method_library(const MethodLibrary& lib) {
  ojson doc = ojson::object();
  for (const auto& m : lib.methods()) {
    ojson node = ojson::object();
    node["task"] = m.task.str();
    if (!m.subtasks.empty()) {
      ojson subs = ojson::object();
      for (std::size_t i = 0; i < m.subtasks.size(); ++i) {
        subs["subtask" + std::to_string(i + 1)] = m.subtasks[i].str();
      }
      node["subtasks"] = std::move(subs);
    }
    node["effect"] = m.effect;
    ojson files = ojson::object();
    for (std::size_t i = 0; i < m.effect_files.size(); ++i) {
      files["file" + std::to_string(i + 1)] = m.effect_files[i];
    }
    node["effect_files"] = std::move(files);
    doc[m.id] = std::move(node);
  }
  return doc.dump(4) + "\n";
}

const Method* find_first_relevant_method(const TaskName& task, const MethodLibrary& lib) {
  auto idx = lib.first_relevant(task);
  return idx ? &lib.at(*idx) : nullptr;
}

std::vector<std::string> ValidationReport::messages() const {
  std::vector<std::string> out;
  for (const auto& c : cycles) out.push_back("cycle: " + text::join(c, " -> "));
  for (const auto& d : dangling_subtasks) {
    out.push_back("dangling subtask (primitive leaf): " + d);
  }
  for (const auto& d : duplicate_tasks) out.push_back("duplicate task name: " + d);
  for (const auto& [id, path] : unknown_effect_files) {
    out.push_back("unknown effect file in " + id + ": " + path);
  }
  return out;
}

ValidationReport validate_library(const MethodLibrary& lib,
                                  const std::optional<std::set<std::string>>& known_files) {
  ValidationReport report;
  const auto& methods = lib.methods();
  const std::size_t n = methods.size();

  std::vector<std::vector<std::size_t>> edges(n);
  std::set<std::string> seen_dangling;
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& sub : methods[i].subtasks) {
      if (auto j = lib.first_relevant(sub)) {
        edges[i].push_back(*j);
      } else if (seen_dangling.insert(sub.key()).second) {
        report.dangling_subtasks.push_back(sub.str());
      }
    }
  }

  std::map<std::string, int> task_counts;
  for (const auto& m : methods) {
    if (++task_counts[m.task.key()] == 2) report.duplicate_tasks.push_back(m.task.str());
  }

  if (known_files) {
    for (const auto& m : methods) {
      for (const auto& f : m.effect_files) {
        if (!known_files->count(f)) report.unknown_effect_files.emplace_back(m.id, f);
      }
    }
  }

  // Tarjan's SCC; every component with a back edge is one cycle.
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  int counter = 0;
  std::function<void(std::size_t)> strongconnect = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (std::size_t w : edges[v]) {
      if (index[w] < 0) {
        strongconnect(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::size_t> component;
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        component.push_back(w);
      } while (w != v);
      const bool self_loop =
          std::find(edges[v].begin(), edges[v].end(), v) != edges[v].end();
      if (component.size() > 1 || self_loop) {
        std::sort(component.begin(), component.end());
        std::vector<std::string> names;
        for (std::size_t c : component) names.push_back(methods[c].task.str());
        report.cycles.push_back(std::move(names));
      }
    }
  };
  for (std::size_t v = 0; v < n; ++v) {
    if (index[v] < 0) strongconnect(v);
  }
  std::sort(report.cycles.begin(), report.cycles.end());
  return report;
}

TaskStack TaskStack::single(const TaskName& root, const MethodLibrary& lib) {
  TaskStack s;
  auto idx = lib.first_relevant(root);
  s.entries_.push_back(StackEntry{root, idx, idx.has_value(), false});
  return s;
}

std::vector<std::string> TaskStack::task_names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.task.str());
  return out;
}

TaskStack TaskStack::popped() const {
  TaskStack s = *this;
  s.entries_.pop_front();
  return s;
}

TaskStack update_task(TaskStack stack, const MethodLibrary& lib, int max_depth) {
  int depth = 0;
  while (!stack.entries_.empty()) {
    StackEntry& head = stack.entries_.front();
    if (head.decomposed || !head.has_own_method || !head.governing) break;
    const Method& m = lib.at(*head.governing);
    if (m.is_primitive()) break;
    if (++depth > max_depth) {
      throw DecompositionDepthExceeded("decomposition-depth exceeded at task '" + head.task.str() +
                                       "' (limit " + std::to_string(max_depth) + ")");
    }
    head.decomposed = true;
    const auto parent = head.governing;
    for (auto it = m.subtasks.rbegin(); it != m.subtasks.rend(); ++it) {
      auto own = lib.first_relevant(*it);
      stack.entries_.push_front(StackEntry{*it, own ? own : parent, own.has_value(), false});
    }
  }
  return stack;
}

const Method* governing_method(const TaskStack& stack, const MethodLibrary& lib) {
  if (stack.empty() || !stack.head().governing) return nullptr;
  return &lib.at(*stack.head().governing);
}

}  // namespace htnagent
