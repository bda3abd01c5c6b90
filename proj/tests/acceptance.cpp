// Acceptance gate: one PASS/FAIL line per criterion. Tolerances are fixed
// here. Criterion 10 never affects the exit status.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "bw_sim.hpp"
#include "episode_fixture.hpp"
#include "htnagent/agent_loop.hpp"
#include "htnagent/domain.hpp"
#include "htnagent/harness.hpp"
#include "htnagent/report.hpp"
#include "htnagent/resources.hpp"
#include "htnagent/subprocess.hpp"
#include "htnagent/verifier.hpp"
#include "test_util.hpp"

using namespace htnagent;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kEpisodeSecondsMax = 5.0;
constexpr double kWilsonTolerance = 1e-3;
constexpr int kBwInstancesPerCell = 20;  // 10 (b,h) cells with b <= 4 -> 200 instances
constexpr int kUmInstancesPerCell = 200;
constexpr int kRgInstances = 300;

struct Outcome {
  bool pass = true;
  std::string detail;
};

Outcome fail(std::string why) { return {false, std::move(why)}; }

Outcome criterion1() {
  std::ostringstream d;
  for (const char* name : {"blocksworld", "unit_movement", "recipe_generator"}) {
    const auto run = testutil::run_fixture(testutil::data_path(std::string("episodes/") + name + ".json"));
    const std::string mismatch = testutil::fixture_mismatch(run);
    if (!mismatch.empty()) return fail(std::string(name) + ": " + mismatch);
    if (run.seconds >= kEpisodeSecondsMax) return fail(std::string(name) + " took " + std::to_string(run.seconds) + " s");
    d << name << "=" << run.result.iterations << " it ";
  }
  return {true, d.str()};
}

std::vector<std::string> to_names(const json& j) { return j.get<std::vector<std::string>>(); }

Outcome criterion2() {
  const std::string root = HTNAGENT_SOURCE_DIR;
  std::ostringstream d;
  for (const char* net : {"blocksworld_human", "unit_movement_human"}) {
    const std::string file = root + "/resources/networks/" + net + ".json";
    ProcessOptions o;
    o.env["PATH"] = std::getenv("PATH") ? std::getenv("PATH") : "/usr/bin:/bin";
    o.timeout_s = 30;
    const auto p = run_process({"python3", root + "/tests/oracles/expand_network.py", file}, o);
    const auto lines = text::split_lines(p.stdout_text);
    if (p.exit_status != 0 || lines.size() != 2) return fail(std::string("oracle script failed: ") + p.stderr_text);
    const auto want_stack = to_names(json::parse(lines[0]));
    const auto want_order = to_names(json::parse(lines[1]));

    const auto lib = load_method_library_file(file);
    TaskStack s = update_task(TaskStack::single(TaskName(kDefaultRootTask), lib), lib);
    if (s.task_names() != want_stack) return fail(std::string(net) + ": initial stack differs");
    std::vector<std::string> order;
    while (!s.empty() && order.size() < 100) {
      order.push_back(s.head().task.str());
      s = update_task(s.popped(), lib);
    }
    if (order != want_order) return fail(std::string(net) + ": completion order differs");
    d << net << " stack=" << want_stack.size() << " order=" << want_order.size() << " ";
  }
  return {true, d.str()};
}

Outcome criterion3() {
  Environment env(make_manifest("", ""));
  PromptContext te;
  te.current_task = "t";
  te.current_effect = "e";
  const std::vector<std::pair<std::string, std::string>> cases{
      {render_agent_prompt({}), "agent_prompt_empty.golden"},
      {render_agent_prompt(te), "agent_prompt_te.golden"},
      {render_verify_prompt("", {}, env), "verify_prompt_empty.golden"},
      {render_task_network_prompt(""), "task_network_prompt_empty.golden"}};
  for (const auto& [got, golden] : cases) {
    if (got != testutil::read_data(golden)) return fail(golden + " differs");
  }
  return {true, std::to_string(cases.size()) + " goldens byte-identical"};
}

Outcome criterion4() {
  Rng rng(4);
  int instances = 0, mutations = 0;
  for (int b = 1; b <= 4; ++b) {
    for (int h = 1; h <= b; ++h) {
      for (int i = 0; i < kBwInstancesPerCell; ++i) {
        const auto inst = bw::generate(b, h, static_cast<std::uint64_t>(1000 * b + 100 * h + i));
        const auto plan = bw::bfs_plan(inst);
        ++instances;
        if (!bw::check(inst, bw::plan_text(plan)).accepted) return fail("oracle plan rejected");
        if (!testutil::simulate(inst, plan).first) return fail("simulator rejects oracle plan");
        const auto blocks = inst.blocks();
        for (int m = 0; m < 3; ++m) {
          bw::Plan mutated = plan;
          if (m == 0 && !mutated.empty()) {
            mutated.erase(mutated.begin() + static_cast<long>(rng.index(mutated.size())));
          } else if (m == 1 && mutated.size() >= 2) {
            const std::size_t k = rng.index(mutated.size() - 1);
            std::swap(mutated[k], mutated[k + 1]);
          } else {
            const auto st = testutil::random_step(rng, blocks);
            if (mutated.empty()) {
              mutated.push_back(st);
            } else {
              mutated[rng.index(mutated.size())] = st;
            }
          }
          const auto sim = testutil::simulate(inst, mutated);
          const auto got = bw::check(inst, bw::plan_text(mutated));
          ++mutations;
          if (got.accepted != sim.first || (!sim.first && got.step != sim.second)) {
            return fail("disagreement on: " + bw::plan_text(mutated));
          }
        }
      }
    }
  }
  return {true, std::to_string(instances) + " instances, " + std::to_string(mutations) + " mutations, 100% agreement"};
}

Outcome criterion5() {
  int checked = 0, feasible = 0;
  for (auto [n, k] : std::vector<std::pair<int, int>>{{1, 1}, {10, 6}, {15, 9}}) {
    for (int s = 0; s < kUmInstancesPerCell; ++s) {
      const auto inst = um::generate(n, k, static_cast<std::uint64_t>(s));
      ++checked;
      if (inst.adj[0].size() != 4) return fail("target degree");
      for (int sec = 0; sec < um::kSections; ++sec) {
        int outers = 0;
        for (int v : inst.adj[static_cast<std::size_t>(um::Instance::neighbor(sec))]) outers += v > um::kSections;
        if (outers < 3) return fail("outer count");
      }
      if (inst.extra_edges.size() != 12) return fail("extra edges");
      const auto moves = um::solve(inst);
      if (!moves) continue;
      ++feasible;
      const auto r = um::check(inst, um::moves_json(*moves));
      if (!r.accepted) return fail("oracle assignment rejected: " + r.reason);
    }
  }
  return {true, std::to_string(checked) + " graphs, " + std::to_string(feasible) + " oracle assignments accepted"};
}

Outcome criterion6() {
  const auto db = rg::RecipeDb::bundled();
  int pairs = 0;
  for (const auto& d : db->dishes()) {
    for (const auto& i : rg::tool_get_ingredients(*db, d)) {
      const auto dishes = rg::tool_get_dishes(*db, i);
      if (std::find(dishes.begin(), dishes.end(), d) == dishes.end()) return fail(d + " missing under " + i);
      ++pairs;
    }
  }
  for (int d : {0, 3, 5}) {
    for (int s = 0; s < kRgInstances; ++s) {
      const auto inst = rg::generate(db, d, static_cast<std::uint64_t>(s));
      if (!rg::check(inst, inst.witness).accepted) return fail("witness rejected");
    }
  }
  return {true, std::to_string(3 * kRgInstances) + " instances, " + std::to_string(pairs) + " index pairs"};
}

Outcome criterion7() {
  const auto a = wilson_interval(0, 10, 1.96), b = wilson_interval(10, 10, 1.96), c = wilson_interval(8, 10, 1.96);
  if (a.lo != 0.0 || b.hi != 1.0) return fail("extremes not exact");
  // Independent recomputation from the quadratic whose roots are the bounds.
  const double n = 10, ph = 0.8, z = 1.96, z2n = z * z / n;
  const double qa = 1 + z2n, qb = -(2 * ph + z2n), qc = ph * ph;
  const double lo = (-qb - std::sqrt(qb * qb - 4 * qa * qc)) / (2 * qa);
  const double hi = (-qb + std::sqrt(qb * qb - 4 * qa * qc)) / (2 * qa);
  if (std::abs(c.lo - lo) > kWilsonTolerance || std::abs(c.hi - hi) > kWilsonTolerance) return fail("8/10 off");
  if (std::abs(c.lo - 0.490) > kWilsonTolerance || std::abs(c.hi - 0.943) > kWilsonTolerance) return fail("8/10 vs reference");
  std::ostringstream d;
  d.precision(4);
  d << "(8,10) -> (" << c.lo << ", " << c.hi << ")";
  return {true, d.str()};
}

Outcome criterion8() {
  const auto inst = make_instance(DomainKind::BlocksWorld, {}, 8);
  FunctionBackend actor([](const std::string&) { return testutil::act(Action::read("files/request.txt")); });
  ScriptedBackend verifier({});
  const auto lib = human_network(DomainKind::BlocksWorld);
  const auto cfg = make_episode_config(inst, Condition::HumanTn, lib, actor, verifier, RewardConfig{}, SolverConfig{},
                                       false, true);
  const auto r = run_episode(cfg);
  const double reward = cumulative_reward(r, cfg.reward);
  if (r.iterations != 100 || r.termination != Termination::HorizonExceeded || std::abs(reward + 10.0) > 1e-9) {
    return fail("iterations=" + std::to_string(r.iterations) + " reward=" + std::to_string(reward));
  }
  return {true, "100 iterations, horizon-exceeded, reward -10.0"};
}

Outcome criterion9() {
  std::vector<BatchSpec> specs;
  BatchSpec bw;
  bw.domain = DomainKind::BlocksWorld;
  bw.cells = {DomainParams{3, 3}, DomainParams{4, 2}};
  bw.conditions = {Condition::HumanTn, Condition::LlmTn, Condition::NoTn};
  bw.trials = 4;
  bw.seed = 2024;
  bw.clock = "step";
  specs.push_back(bw);
  BatchSpec um = bw;
  um.domain = DomainKind::UnitMovement;
  um.cells = {DomainParams{3, 3, 2, 2}};
  specs.push_back(um);
  BatchSpec rg = bw;
  rg.domain = DomainKind::RecipeGenerator;
  rg.cells = {DomainParams{}};
  rg.conditions = {Condition::HumanTn, Condition::NoTn};
  rg.actor = {{"kind", "scripted"},
              {"responses", {testutil::act(Action::write("solver.py", "print(1)\n")), testutil::act(Action::verify()),
                             testutil::act(Action::verify()), testutil::act(Action::verify())}}};
  specs.push_back(rg);
  for (auto spec : specs) {
    spec.workers = 1;
    const std::string a = run_batch(spec).to_json().dump();
    const std::string b = run_batch(spec).to_json().dump();
    spec.workers = 4;
    const std::string c = run_batch(spec).to_json().dump();
    if (a != b || a != c) return fail(std::string(domain_name(spec.domain)) + " batch differs between runs");
  }
  return {true, "3 batches identical across 2 sequential runs and 1 parallel run"};
}

// Non-gating.
Outcome criterion10() {
  const char* endpoint = std::getenv("HTNAGENT_ENDPOINT");
  const bool live = endpoint && *endpoint;
  BatchSpec s;
  s.domain = DomainKind::BlocksWorld;
  for (int b = 3; b <= 9; ++b) s.cells.push_back(DomainParams{b, std::min(b, 6)});
  s.conditions = {Condition::HumanTn, Condition::NoTn};
  s.seed = 7;
  if (live) {
    s.trials = 20;
    if (const char* t = std::getenv("HTNAGENT_LIVE_TRIALS")) s.trials = std::max(20, std::atoi(t));
    s.actor = {{"kind", "http"}};
    if (const char* m = std::getenv("HTNAGENT_MODEL")) s.actor["model"] = m;
    s.workers = 4;
  } else {
    s.trials = 2;
    s.actor = {{"kind", "oracle"}};
    s.clock = "step";
  }
  const fs::path out = fs::temp_directory_path() / "htnagent-acceptance-live";
  fs::remove_all(out);
  BatchRunOptions opts;
  opts.out_dir = out;
  const auto result = run_batch(s, opts);
  emit_report(result, out);
  int ordered = 0, cells = 0;
  for (std::size_t i = 0; i + 1 < result.cells.size(); i += 2) {
    ++cells;
    ordered += result.cells[i].rate.value_or(0) >= result.cells[i + 1].rate.value_or(0);
  }
  std::ostringstream d;
  d << (live ? "live" : "scripted, no endpoint") << "; human-tn >= no-tn in " << ordered << "/" << cells
    << " cells; reports in " << out.string();
  return {true, d.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 algorithm fidelity", criterion1},     {"2 decomposition correctness", criterion2},
      {"3 prompt bit-exactness", criterion3},   {"4 blocks world oracle equivalence", criterion4},
      {"5 unit movement construction", criterion5}, {"6 recipe solvability and tools", criterion6},
      {"7 wilson interval", criterion7},        {"8 horizon semantics", criterion8},
      {"9 determinism", criterion9},            {"10 live reproduction (non-gating)", criterion10}};
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    const bool gating = name.rfind("10 ", 0) != 0;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    if (!o.pass && gating) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << name << ": " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
