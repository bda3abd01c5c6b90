#include "htnagent/blocksworld.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>

#include "htnagent/errors.hpp"
#include "htnagent/rng.hpp"
#include "htnagent/text.hpp"

namespace htnagent::bw {

std::vector<std::string> Instance::blocks() const {
  std::vector<std::string> out;
  for (const auto& s : stacks) out.insert(out.end(), s.begin(), s.end());
  return out;
}

std::size_t Instance::size() const {
  std::size_t n = 0;
  for (const auto& s : stacks) n += s.size();
  return n;
}

std::string Step::str() const {
  switch (op) {
    case Op::Pick: return "pick " + block;
    case Op::Put: return "put " + block;
    case Op::Stack: return "stack " + block + " " + target;
    case Op::Unstack: return "unstack " + block + " " + target;
  }
  return {};
}

std::string plan_text(const Plan& plan) {
  std::string out;
  for (const auto& s : plan) out += s.str() + "\n";
  return out;
}

State::State(const Instance& inst) {
  for (const auto& stack : inst.stacks) {
    for (std::size_t i = 0; i < stack.size(); ++i) {
      below_[stack[i]] = i == 0 ? std::string() : stack[i - 1];
    }
  }
}

bool State::is_clear(const std::string& block) const {
  if (held_ && *held_ == block) return false;
  for (const auto& [b, under] : below_) {
    if (under == block) return false;
  }
  return true;
}

std::string State::support(const std::string& block) const {
  auto it = below_.find(block);
  return it == below_.end() ? std::string() : it->second;
}

std::string State::apply(const Step& step) {
  const bool known = below_.count(step.block) != 0 || (held_ && *held_ == step.block);
  if (!known) return "unknown block: " + step.block;
  switch (step.op) {
    case Op::Pick: {
      if (held_) return "hand not empty";
      if (below_.at(step.block) != "") return "block not on table";
      if (!is_clear(step.block)) return "block not clear";
      below_.erase(step.block);
      held_ = step.block;
      return {};
    }
    case Op::Unstack: {
      if (below_.count(step.target) == 0 && !(held_ && *held_ == step.target)) {
        return "unknown block: " + step.target;
      }
      if (held_) return "hand not empty";
      if (below_.at(step.block) != step.target) return "block not on top of other block";
      if (!is_clear(step.block)) return "block not clear";
      below_.erase(step.block);
      held_ = step.block;
      return {};
    }
    case Op::Put: {
      if (!held_ || *held_ != step.block) return "block not held";
      below_[step.block] = "";
      held_.reset();
      return {};
    }
    case Op::Stack: {
      if (below_.count(step.target) == 0 && !(held_ && *held_ == step.target)) {
        return "unknown block: " + step.target;
      }
      if (!held_ || *held_ != step.block) return "block not held";
      if (step.block == step.target) return "block stacked on itself";
      if (!is_clear(step.target)) return "target block not clear";
      below_[step.block] = step.target;
      held_.reset();
      return {};
    }
  }
  return "unknown action";
}

bool State::satisfies(const std::vector<std::string>& goal) const {
  for (std::size_t i = 1; i < goal.size(); ++i) {
    auto it = below_.find(goal[i]);
    if (it == below_.end() || it->second != goal[i - 1]) return false;
  }
  return true;
}

std::vector<std::vector<std::string>> State::stacks() const {
  std::map<std::string, std::string> above;
  for (const auto& [b, under] : below_) {
    if (!under.empty()) above[under] = b;
  }
  std::vector<std::vector<std::string>> out;
  for (const auto& [b, under] : below_) {
    if (!under.empty()) continue;
    std::vector<std::string> s{b};
    for (auto it = above.find(b); it != above.end(); it = above.find(s.back())) {
      s.push_back(it->second);
    }
    out.push_back(std::move(s));
  }
  return out;  // ordered by bottom block name
}

std::string State::key() const {
  std::string k;
  for (const auto& s : stacks()) k += text::join(s, ",") + "|";
  k += "#";
  if (held_) k += *held_;
  return k;
}

const std::vector<std::string>& color_pool() {
  static const std::vector<std::string> pool{
      "blue",   "gray",  "red",    "orange", "yellow", "black",  "cyan",   "purple",
      "green",  "white", "brown",  "pink",   "magenta", "violet", "teal",  "olive",
      "maroon", "navy",  "silver", "gold",   "indigo", "lime",   "beige", "coral"};
  return pool;
}

Instance generate(int b, int h, std::uint64_t seed) {
  if (h < 1 || b < h || static_cast<std::size_t>(b) > color_pool().size()) {
    throw InvalidArgument("need 1 <= h <= b <= " + std::to_string(color_pool().size()) +
                          ", got b=" + std::to_string(b) + " h=" + std::to_string(h));
  }
  Rng rng(seed);
  const auto names = rng.sample(color_pool(), static_cast<std::size_t>(b));

  Instance inst;
  for (const auto& name : names) {
    // Table with probability 1 / (1 + #stacks); every stack has a clear top.
    const std::size_t r = rng.index(inst.stacks.size() + 1);
    if (r == 0) {
      inst.stacks.push_back({name});
    } else {
      inst.stacks[r - 1].push_back(name);
    }
  }
  inst.goal = rng.sample(names, static_cast<std::size_t>(h));
  return inst;
}

std::string render_request(const Instance& inst) {
  std::string out = "As initial conditions I have that:\n";
  for (const auto& stack : inst.stacks) {
    for (std::size_t i = 0; i < stack.size(); ++i) {
      const std::string& x = stack[i];
      if (i + 1 == stack.size()) out += "the " + x + " block is clear\n";
      if (i == 0) {
        out += "the " + x + " block is on the table\n";
      } else {
        out += "the " + x + " block is on top of the " + stack[i - 1] + " block\n";
      }
    }
  }
  out += "My goal is to have that: \n";
  for (std::size_t i = 1; i < inst.goal.size(); ++i) {
    out += "the " + inst.goal[i] + " block is on top of the " + inst.goal[i - 1] + " block\n";
  }
  return out;
}

std::variant<Plan, CheckResult> parse_plan(std::string_view text) {
  Plan plan;
  int n = 0;
  for (const auto& raw : text::split_lines(text)) {
    auto tokens = text::split_ws(raw);
    if (tokens.empty()) continue;
    ++n;
    const std::string& verb = tokens[0];
    Step step;
    std::size_t want = 0;
    if (verb == "pick") {
      step.op = Op::Pick;
      want = 2;
    } else if (verb == "put") {
      step.op = Op::Put;
      want = 2;
    } else if (verb == "stack") {
      step.op = Op::Stack;
      want = 3;
    } else if (verb == "unstack") {
      step.op = Op::Unstack;
      want = 3;
    } else {
      return CheckResult::reject("unknown action: " + verb, n);
    }
    if (tokens.size() != want) return CheckResult::reject("wrong number of arguments", n);
    step.block = tokens[1];
    if (want == 3) step.target = tokens[2];
    plan.push_back(std::move(step));
  }
  return plan;
}

CheckResult check(const Instance& inst, std::string_view text) {
  auto parsed = parse_plan(text);
  if (auto* bad = std::get_if<CheckResult>(&parsed)) return *bad;
  const Plan& plan = std::get<Plan>(parsed);
  State state(inst);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    std::string why = state.apply(plan[i]);
    if (!why.empty()) return CheckResult::reject(why, static_cast<int>(i + 1));
  }
  if (!state.satisfies(inst.goal)) return CheckResult::reject("goal not satisfied");
  return CheckResult::accept();
}

namespace {

std::vector<Step> successors(const State& s) {
  std::vector<Step> out;
  const auto stacks = s.stacks();
  if (const auto& held = s.held()) {
    out.push_back({Op::Put, *held, {}});
    for (const auto& st : stacks) out.push_back({Op::Stack, *held, st.back()});
    return out;
  }
  for (const auto& st : stacks) {
    if (st.size() == 1) {
      out.push_back({Op::Pick, st.back(), {}});
    } else {
      out.push_back({Op::Unstack, st.back(), st[st.size() - 2]});
    }
  }
  return out;
}

}  // namespace

Plan bfs_plan(const Instance& inst, std::size_t bound) {
  if (inst.size() > bound) {
    throw InvalidArgument("oracle bound exceeded: " + std::to_string(inst.size()) + " blocks > " +
                          std::to_string(bound));
  }
  struct Node {
    State state;
    std::size_t parent;
    Step via;
  };
  std::vector<Node> nodes;
  nodes.push_back({State(inst), 0, {}});
  std::unordered_map<std::string, std::size_t> seen{{nodes[0].state.key(), 0}};
  std::deque<std::size_t> frontier{0};
  while (!frontier.empty()) {
    const std::size_t cur = frontier.front();
    frontier.pop_front();
    if (nodes[cur].state.satisfies(inst.goal)) {
      Plan plan;
      for (std::size_t i = cur; i != 0; i = nodes[i].parent) plan.push_back(nodes[i].via);
      std::reverse(plan.begin(), plan.end());
      return plan;
    }
    for (const Step& step : successors(nodes[cur].state)) {
      State next = nodes[cur].state;
      if (!next.apply(step).empty()) continue;
      auto [it, fresh] = seen.emplace(next.key(), nodes.size());
      if (!fresh) continue;
      nodes.push_back({std::move(next), cur, step});
      frontier.push_back(nodes.size() - 1);
    }
  }
  throw Error("blocks world search exhausted without reaching the goal");
}

Plan constructive_plan(const Instance& inst) {
  State state(inst);
  if (state.satisfies(inst.goal)) return {};
  Plan plan;
  for (const auto& stack : inst.stacks) {
    for (std::size_t i = stack.size(); i-- > 1;) {
      plan.push_back({Op::Unstack, stack[i], stack[i - 1]});
      plan.push_back({Op::Put, stack[i], {}});
    }
  }
  for (std::size_t i = 1; i < inst.goal.size(); ++i) {
    plan.push_back({Op::Pick, inst.goal[i], {}});
    plan.push_back({Op::Stack, inst.goal[i], inst.goal[i - 1]});
  }
  return plan;
}

}  // namespace htnagent::bw
