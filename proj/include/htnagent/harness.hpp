#pragma once

// Batch experiments: seeded grids of episodes, ground-truth judging,
// aggregation and Wilson intervals.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "htnagent/agent_loop.hpp"
#include "htnagent/domain.hpp"

namespace htnagent {

inline constexpr double kWilsonZ95 = 1.959964;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Wilson score interval, clamped to [0, 1]. Throws InvalidArgument unless
/// 0 <= successes <= trials, trials >= 1 and z > 0.
Interval wilson_interval(long successes, long trials, double z = kWilsonZ95);

/// Grid of cells x conditions x trials for one domain.
///
/// Backend configs are JSON objects with a "kind":
///   "http"      chat endpoint (see HttpChatConfig), shared by all episodes
///   "scripted"  {"responses": [...]}, replayed afresh in every episode
///   "oracle"    actor that alternates writing the oracle answer and verify
///   "loop"      actor that reads the request file forever
///   "pass"      verifier that always answers PASS: TRUE
///   "fail"      verifier that always answers PASS: FALSE
struct BatchSpec {
  DomainKind domain = DomainKind::BlocksWorld;
  std::vector<DomainParams> cells;
  std::vector<Condition> conditions;
  int trials = 0;
  std::uint64_t seed = 0;
  int workers = 1;
  RewardConfig reward;
  nlohmann::json actor = {{"kind", "oracle"}};
  /// Null: the actor's endpoint for "http", otherwise "pass".
  nlohmann::json verifier = nullptr;
  SolverConfig solver;
  bool read_copies_to_notes = false;
  /// "steady" for real timings, "step" for a deterministic counter.
  std::string clock = "steady";
  /// Library for llm-tn. Without one the bundled generated network is used,
  /// or one is generated once per batch through the actor backend.
  std::optional<std::string> llm_tn_file;
  SubtaskOrder llm_tn_order = SubtaskOrder::Ascending;
  bool save_transcripts = false;

  /// Throws ConfigError on unknown domains, conditions or negative counts.
  static BatchSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct EpisodeRecord {
  std::size_t cell = 0;
  std::string cell_label;
  Condition condition = Condition::HumanTn;
  int trial = 0;
  std::uint64_t seed = 0;
  std::uint64_t instance_seed = 0;
  bool success = false;
  bool verified_complete = false;
  std::optional<bool> checker_accepted;
  std::string check_reason;
  Termination termination = Termination::HorizonExceeded;
  int iterations = 0;
  double reward = 0.0;
  PhaseTimes wall_times;
  std::vector<std::string> command_log;
  std::vector<std::string> completed_tasks;
  std::string final_answer;
  std::string error;
  std::size_t max_stack_size = 0;
  std::size_t actor_calls = 0;
  std::size_t verifier_calls = 0;

  /// "<cell>/<condition>/<trial>".
  std::string key() const;
  nlohmann::json to_json() const;
  static EpisodeRecord from_json(const nlohmann::json& j);
};

struct CellResult {
  std::size_t cell = 0;
  std::string label;
  Condition condition = Condition::HumanTn;
  /// Episodes judged; infrastructure errors are not trials.
  int trials = 0;
  int successes = 0;
  int timeouts = 0;
  int infra_errors = 0;
  /// Absent when trials == 0.
  std::optional<double> rate;
  std::optional<Interval> interval;
  double mean_iterations = 0.0;
  PhaseTimes mean_wall_times;
};

struct PooledRuntime {
  Condition condition = Condition::HumanTn;
  int episodes = 0;
  PhaseTimes mean_wall_times;
};

struct BatchResult {
  DomainKind domain = DomainKind::BlocksWorld;
  std::vector<Condition> condition_order;
  std::vector<CellResult> cells;  // by cell, then condition order
  std::vector<PooledRuntime> pooled;
  std::vector<EpisodeRecord> records;  // by cell, condition order, trial

  nlohmann::json to_json() const;
};

/// Pure function of the records: sorts them and computes every aggregate.
BatchResult aggregate(DomainKind domain, const std::vector<Condition>& condition_order,
                      std::vector<EpisodeRecord> records, double z = kWilsonZ95);

/// Seed of one episode; depends on the cell label, not its position.
std::uint64_t episode_seed(std::uint64_t batch_seed, std::string_view cell_label,
                           Condition condition, int trial);
/// Instance seed; shared by all conditions so they see the same problems.
std::uint64_t instance_seed(std::uint64_t batch_seed, std::string_view cell_label, int trial);

struct BatchRunOptions {
  /// When set: records.jsonl is appended per episode, spec.json and
  /// batch_result.json are written, and earlier records are reused.
  std::optional<std::filesystem::path> out_dir;
  bool resume = true;
  std::function<void(const EpisodeRecord&)> on_record;
};

BatchResult run_batch(const BatchSpec& spec, const BatchRunOptions& opts = {});

/// Reads one record per line; blank lines are skipped.
std::vector<EpisodeRecord> read_records(const std::filesystem::path& jsonl);

/// Backend for a non-http kind, built for one episode.
std::unique_ptr<Backend> make_episode_backend(const nlohmann::json& cfg,
                                              const DomainInstance& instance);

/// Library used for `condition` in `domain`.
MethodLibrary library_for(DomainKind domain, Condition condition,
                          const std::optional<std::string>& llm_tn_file = std::nullopt,
                          SubtaskOrder order = SubtaskOrder::Ascending,
                          Backend* generator = nullptr);

/// Episode configuration for one instance; backends are borrowed.
EpisodeConfig make_episode_config(const DomainInstance& instance, Condition condition,
                                  const MethodLibrary& library, Backend& actor, Backend& verifier,
                                  const RewardConfig& reward, const SolverConfig& solver,
                                  bool read_copies_to_notes, bool step_clock);

}  // namespace htnagent
