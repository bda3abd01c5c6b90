#pragma once

// One episode of the decompose / act / verify loop.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "htnagent/environment.hpp"
#include "htnagent/llm_gateway.hpp"
#include "htnagent/task_network.hpp"

namespace htnagent {

enum class Condition { HumanTn, LlmTn, NoTn };

std::string_view condition_name(Condition c);  // "human-tn", "llm-tn", "no-tn"
std::optional<Condition> parse_condition(std::string_view name);

enum class Termination { VerifiedComplete, HorizonExceeded, InfrastructureError };

std::string_view termination_name(Termination t);  // "verified-complete", ...
std::optional<Termination> parse_termination(std::string_view name);

inline constexpr std::string_view kDefaultRootTask = "process user request";
inline constexpr std::string_view kParseErrorCommand = "JSONDecode error";

struct PhaseTimes {
  double action_llm = 0.0;
  double verify_llm = 0.0;
  double environment = 0.0;
  double solver = 0.0;

  double total() const { return action_llm + verify_llm + environment + solver; }
  friend bool operator==(const PhaseTimes&, const PhaseTimes&) = default;
};

/// Ground-truth judgement of a final answer.
struct CheckResult {
  bool accepted = false;
  std::string reason;
  int step = 0;  // 1-based offending step for plan checkers, 0 otherwise

  static CheckResult accept() { return {true, {}, 0}; }
  static CheckResult reject(std::string reason, int step = 0) {
    return {false, std::move(reason), step};
  }
};

using AnswerChecker = std::function<CheckResult(const std::string& answer)>;

struct TranscriptEntry {
  int iteration = 0;
  std::string task;
  std::string prompt;
  std::string response;
  std::string command;  // command-log line for this iteration
  std::string trace;    // trace produced by this iteration
  std::optional<bool> verified;
};

struct EpisodeConfig {
  RewardConfig reward;
  Condition condition = Condition::HumanTn;
  /// Under no-tn: exactly one primitive method (see make_no_tn_library).
  MethodLibrary library;
  std::string root_task{kDefaultRootTask};
  Backend* actor = nullptr;
  /// Falls back to the actor when null.
  Backend* verifier = nullptr;
  FileManifest manifest;
  EnvironmentOptions env_options;
  /// Recorded in the result. The loop itself draws no random numbers.
  std::uint64_t seed = 0;
  /// Seconds source for phase timings; steady clock when empty. It is
  /// also handed to the environment unless env_options.clock is set.
  std::function<double()> clock;
  /// Judges final_answer when the stack empties. Without one, success
  /// equals verified completion.
  AnswerChecker answer_checker;
  int max_depth = kDefaultMaxDecompositionDepth;
  bool record_prompts = true;
};

struct EpisodeResult {
  bool success = false;
  bool verified_complete = false;
  std::optional<bool> checker_accepted;
  std::string check_reason;
  Termination termination = Termination::HorizonExceeded;
  int iterations = 0;
  PhaseTimes wall_times;
  std::vector<std::string> command_log;
  std::vector<std::string> completed_tasks;
  std::string final_answer;
  std::map<std::string, std::string> final_workspace;
  std::vector<TranscriptEntry> transcript;
  std::string error;
  std::size_t max_stack_size = 0;
  std::size_t actor_calls = 0;
  std::size_t verifier_calls = 0;
  std::uint64_t seed = 0;
};

/// Throws ConfigError for configuration problems (missing actor, invalid
/// reward, a no-tn library with more than one method, missing solver
/// interpreter). Backend and workspace failures end the episode with
/// termination = infrastructure-error instead.
EpisodeResult run_episode(const EpisodeConfig& cfg);

/// Success pays r_success on the terminal step; every other step costs r_step.
double cumulative_reward(const EpisodeResult& result, const RewardConfig& cfg);

/// The single-task library used for no-tn: the root method of `full` with
/// its subtasks removed, so the agent works against the end conditions only.
MethodLibrary make_no_tn_library(const MethodLibrary& full,
                                 std::string_view root_task = kDefaultRootTask);

/// Returns start, start+step, start+2*step, ... on successive calls.
/// Copies share the counter.
std::function<double()> make_step_clock(double step = 0.001, double start = 0.0);

nlohmann::json to_json(const PhaseTimes& t);
PhaseTimes phase_times_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TranscriptEntry& e);

}  // namespace htnagent
