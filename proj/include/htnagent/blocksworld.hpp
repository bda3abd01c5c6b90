#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <map>
#include <string_view>
#include <variant>
#include <vector>

#include "htnagent/agent_loop.hpp"

namespace htnagent::bw {

/// Initial stacks bottom to top, in the order their bottom blocks were
/// placed, plus the goal chain bottom to top.
struct Instance {
  std::vector<std::vector<std::string>> stacks;
  std::vector<std::string> goal;

  std::vector<std::string> blocks() const;
  std::size_t size() const;
};

enum class Op { Pick, Put, Stack, Unstack };

struct Step {
  Op op = Op::Pick;
  std::string block;
  std::string target;  // stack / unstack only

  std::string str() const;  // "stack red green"
  friend bool operator==(const Step&, const Step&) = default;
};

using Plan = std::vector<Step>;

std::string plan_text(const Plan& plan);

/// Mutable world used by the checker and the search.
class State {
 public:
  explicit State(const Instance& inst);

  /// Empty on success, otherwise the violated rule.
  std::string apply(const Step& step);
  bool satisfies(const std::vector<std::string>& goal) const;
  bool is_clear(const std::string& block) const;
  /// "" when on the table or held.
  std::string support(const std::string& block) const;
  const std::optional<std::string>& held() const noexcept { return held_; }
  /// Canonical key: sorted stacks plus the held block.
  std::string key() const;

  std::vector<std::vector<std::string>> stacks() const;

 private:
  std::map<std::string, std::string> below_;  // "" = table; held block absent
  std::optional<std::string> held_;
};

inline constexpr std::size_t kOracleBound = 6;

/// Color names blocks are drawn from.
const std::vector<std::string>& color_pool();

/// Throws InvalidArgument unless 1 <= h <= b <= pool size.
Instance generate(int b, int h, std::uint64_t seed);

/// Request text: initial conditions per stack bottom-up, then the goal chain.
std::string render_request(const Instance& inst);

/// One action per line. Blank lines and surrounding whitespace are ignored.
/// Returns the 1-based line-of-action index in `step` on format errors.
std::variant<Plan, CheckResult> parse_plan(std::string_view text);

CheckResult check(const Instance& inst, std::string_view plan_text);

/// Shortest plan by breadth-first search over canonical states.
/// Throws InvalidArgument when the instance has more than `bound` blocks.
Plan bfs_plan(const Instance& inst, std::size_t bound = kOracleBound);

/// Unstack everything to the table, then build the goal chain. Valid for
/// any size, not minimal.
Plan constructive_plan(const Instance& inst);

}  // namespace htnagent::bw
