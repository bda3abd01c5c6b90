#pragma once

// Loads a scripted episode from tests/data/episodes and compares the
// result with its expected record.

#include <string>
#include <vector>

#include <json.hpp>

#include "htnagent/agent_loop.hpp"
#include "htnagent/domain.hpp"
#include "htnagent/harness.hpp"
#include "htnagent/text.hpp"

namespace testutil {

struct FixtureRun {
  htnagent::DomainInstance instance;
  htnagent::EpisodeResult result;
  nlohmann::json expected;
  double seconds = 0.0;
};

inline FixtureRun run_fixture(const std::string& path) {
  using namespace htnagent;
  const auto doc = nlohmann::json::parse(text::read_file(path));
  const DomainKind kind = *parse_domain(doc.at("domain").get<std::string>());
  FixtureRun run{make_instance(kind, DomainParams::from_json(doc.at("params")), doc.at("seed").get<std::uint64_t>()),
                 {},
                 doc.at("expected"),
                 0.0};
  ScriptedBackend actor(doc.at("actor").get<std::vector<std::string>>());
  ScriptedBackend verifier(doc.at("verifier").get<std::vector<std::string>>());
  const Condition cond = *parse_condition(doc.at("condition").get<std::string>());
  const MethodLibrary lib = library_for(kind, cond);
  const EpisodeConfig cfg = make_episode_config(run.instance, cond, lib, actor, verifier, RewardConfig{},
                                                SolverConfig{}, false, /*step_clock=*/true);
  const auto t0 = std::chrono::steady_clock::now();
  run.result = run_episode(cfg);
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return run;
}

/// Empty when the run matches its expected record, else the first mismatch.
inline std::string fixture_mismatch(const FixtureRun& run) {
  using namespace htnagent;
  const auto& e = run.expected;
  const auto& r = run.result;
  if (termination_name(r.termination) != e.at("termination").get<std::string>()) {
    return "termination " + std::string(termination_name(r.termination)) + " (" + r.error + ")";
  }
  if (r.success != e.at("success").get<bool>()) return "success flag, checker: " + r.check_reason;
  if (r.iterations != e.at("iterations").get<int>()) return "iterations " + std::to_string(r.iterations);
  if (r.command_log != e.at("command_log").get<std::vector<std::string>>()) return "command log";
  if (r.completed_tasks != e.at("completed_tasks").get<std::vector<std::string>>()) return "completed tasks";
  // Read-only files keep their manifest content; mutable ones match the record.
  const auto mutable_files = e.at("mutable_files").get<std::map<std::string, std::string>>();
  for (const auto& f : run.instance.manifest()) {
    auto it = r.final_workspace.find(f.path);
    if (it == r.final_workspace.end()) return "missing file " + f.path;
    auto m = mutable_files.find(f.path);
    const std::string& want = m != mutable_files.end() ? m->second : f.content;
    if (it->second != want) return "content of " + f.path;
  }
  if (r.final_workspace.size() != run.instance.manifest().size()) return "workspace file count";
  return {};
}

}  // namespace testutil
