#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "htnagent/blocksworld.hpp"
#include "htnagent/rng.hpp"

namespace testutil {

using htnagent::bw::Instance;
using htnagent::bw::Op;
using htnagent::bw::Plan;
using htnagent::bw::Step;

// Independent simulator: explicit list of stacks plus the hand.
struct Sim {
  std::vector<std::vector<std::string>> stacks;
  std::string hand;

  explicit Sim(const Instance& inst) : stacks(inst.stacks) {}

  std::pair<int, int> find(const std::string& b) const {
    for (int s = 0; s < static_cast<int>(stacks.size()); ++s) {
      for (int i = 0; i < static_cast<int>(stacks[s].size()); ++i) {
        if (stacks[s][i] == b) return {s, i};
      }
    }
    return {-1, -1};
  }
  bool top(const std::string& b) const {
    auto [s, i] = find(b);
    return s >= 0 && i + 1 == static_cast<int>(stacks[s].size());
  }
  void drop_empty() {
    stacks.erase(std::remove_if(stacks.begin(), stacks.end(), [](auto& v) { return v.empty(); }), stacks.end());
  }
  bool step(const Step& st) {
    switch (st.op) {
      case Op::Pick: {
        auto [s, i] = find(st.block);
        if (!hand.empty() || s < 0 || i != 0 || !top(st.block)) return false;
        stacks[s].pop_back();
        hand = st.block;
        break;
      }
      case Op::Put:
        if (hand != st.block || hand.empty()) return false;
        stacks.push_back({hand});
        hand.clear();
        break;
      case Op::Stack: {
        if (hand != st.block || hand.empty() || st.block == st.target || !top(st.target)) return false;
        stacks[find(st.target).first].push_back(hand);
        hand.clear();
        break;
      }
      case Op::Unstack: {
        auto [s, i] = find(st.block);
        auto [t, j] = find(st.target);
        if (!hand.empty() || s < 0 || t != s || i != j + 1 || !top(st.block)) return false;
        stacks[s].pop_back();
        hand = st.block;
        break;
      }
    }
    drop_empty();
    return true;
  }
  bool goal(const std::vector<std::string>& g) const {
    for (std::size_t k = 1; k < g.size(); ++k) {
      auto [s, i] = find(g[k]);
      auto [t, j] = find(g[k - 1]);
      if (s < 0 || s != t || i != j + 1) return false;
    }
    return true;
  }
};

// Verdict and first failing step (0 when the goal check fails).
inline std::pair<bool, int> simulate(const Instance& inst, const Plan& plan) {
  Sim sim(inst);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    if (!sim.step(plan[i])) return {false, static_cast<int>(i + 1)};
  }
  return {sim.goal(inst.goal), 0};
}

inline Step random_step(htnagent::Rng& rng, const std::vector<std::string>& blocks) {
  Step s;
  s.op = static_cast<Op>(rng.index(4));
  s.block = blocks[rng.index(blocks.size())];
  if (s.op == Op::Stack || s.op == Op::Unstack) s.target = blocks[rng.index(blocks.size())];
  return s;
}

}  // namespace testutil
