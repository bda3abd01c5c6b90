#include "htnagent/agent_loop.hpp"

#include <chrono>
#include <memory>

#include "htnagent/errors.hpp"
#include "htnagent/text.hpp"
#include "htnagent/verifier.hpp"

namespace htnagent {

std::string_view condition_name(Condition c) {
  switch (c) {
    case Condition::HumanTn: return "human-tn";
    case Condition::LlmTn: return "llm-tn";
    case Condition::NoTn: return "no-tn";
  }
  return "human-tn";
}

std::optional<Condition> parse_condition(std::string_view name) {
  const std::string n = text::to_lower(text::trim(name));
  if (n == "human-tn") return Condition::HumanTn;
  if (n == "llm-tn") return Condition::LlmTn;
  if (n == "no-tn") return Condition::NoTn;
  return std::nullopt;
}

std::string_view termination_name(Termination t) {
  switch (t) {
    case Termination::VerifiedComplete: return "verified-complete";
    case Termination::HorizonExceeded: return "horizon-exceeded";
    case Termination::InfrastructureError: return "infrastructure-error";
  }
  return "horizon-exceeded";
}

std::optional<Termination> parse_termination(std::string_view name) {
  for (auto t : {Termination::VerifiedComplete, Termination::HorizonExceeded,
                 Termination::InfrastructureError}) {
    if (termination_name(t) == name) return t;
  }
  return std::nullopt;
}

namespace {

double steady_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

void check_config(const EpisodeConfig& cfg) {
  if (cfg.actor == nullptr) throw ConfigError("episode has no actor backend");
  try {
    cfg.reward.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (cfg.condition == Condition::NoTn) {
    if (cfg.library.size() != 1 || !cfg.library.at(0).is_primitive()) {
      throw ConfigError("no-tn requires a library with exactly one primitive method");
    }
  }
}

}  // namespace

EpisodeResult run_episode(const EpisodeConfig& cfg) {
  check_config(cfg);
  const std::function<double()> clock = cfg.clock ? cfg.clock : steady_seconds;
  Backend& actor = *cfg.actor;
  Backend& verifier = cfg.verifier ? *cfg.verifier : *cfg.actor;
  const MethodLibrary& lib = cfg.library;

  EpisodeResult result;
  result.seed = cfg.seed;

  EnvironmentOptions env_opts = cfg.env_options;
  if (!env_opts.clock) env_opts.clock = clock;

  std::unique_ptr<Environment> env;
  TaskStack stack;
  try {
    env = std::make_unique<Environment>(cfg.manifest, env_opts);
    stack = update_task(TaskStack::single(TaskName(cfg.root_task), lib), lib, cfg.max_depth);
  } catch (const WorkspaceError& e) {
    result.termination = Termination::InfrastructureError;
    result.error = e.what();
    return result;
  } catch (const DecompositionDepthExceeded& e) {
    result.termination = Termination::InfrastructureError;
    result.error = e.what();
    return result;
  }
  result.max_stack_size = stack.size();

  // Agent memory for the prompt; not part of the environment state.
  std::string last_response;
  std::vector<std::string> recent_commands;

  try {
    for (int i = 1; i <= cfg.reward.horizon; ++i) {
      if (stack.empty()) break;

      const StackEntry& head = stack.head();
      const Method* method = governing_method(stack, lib);
      PromptContext ctx;
      ctx.notes = env->content(paths::kNotes);
      ctx.last_response = last_response;
      ctx.last_commands = recent_commands;
      ctx.last_output = env->trace();
      ctx.current_task = head.task.str();
      ctx.current_effect = method ? method->effect : std::string();
      const std::string prompt = render_agent_prompt(ctx);

      double t0 = clock();
      const std::string reply = actor.complete(prompt);
      result.wall_times.action_llm += clock() - t0;
      ++result.actor_calls;
      last_response = reply;

      TranscriptEntry entry;
      entry.iteration = i;
      entry.task = head.task.str();
      if (cfg.record_prompts) entry.prompt = prompt;
      entry.response = reply;

      ParseResult parsed = parse_agent_response(reply);
      if (auto* failure = std::get_if<ParseFailure>(&parsed)) {
        entry.command = std::string(kParseErrorCommand);
        env->set_trace(failure->message);
      } else {
        const Action& action = std::get<AgentResponse>(parsed).action;
        entry.command = action.summary();
        if (action.kind == ActionKind::Verify) {
          env->set_trace("");
          t0 = clock();
          VerifyOutcome outcome = verify_task(verifier, method, *env);
          result.wall_times.verify_llm += clock() - t0;
          if (method && !text::trim(method->effect).empty()) ++result.verifier_calls;
          env->set_trace(outcome.feedback);
          entry.verified = outcome.verified;
          if (outcome.verified) {
            result.completed_tasks.push_back(head.task.str());
            stack = update_task(stack.popped(), lib, cfg.max_depth);
            result.max_stack_size = std::max(result.max_stack_size, stack.size());
          }
        } else {
          t0 = clock();
          StepResult step = env->apply(action);
          const double elapsed = clock() - t0;
          result.wall_times.solver += step.solver_seconds;
          result.wall_times.environment += elapsed - step.solver_seconds;
        }
      }
      entry.trace = env->trace();
      result.command_log.push_back(entry.command);
      recent_commands.push_back(entry.command);
      if (recent_commands.size() > kPromptCommandWindow) recent_commands.erase(recent_commands.begin());
      result.transcript.push_back(std::move(entry));
      result.iterations = i;
    }
  } catch (const TransportError& e) {
    result.termination = Termination::InfrastructureError;
    result.error = e.what();
  } catch (const ScriptedExhausted& e) {
    result.termination = Termination::InfrastructureError;
    result.error = e.what();
  } catch (const WorkspaceError& e) {
    result.termination = Termination::InfrastructureError;
    result.error = e.what();
  } catch (const DecompositionDepthExceeded& e) {
    result.termination = Termination::InfrastructureError;
    result.error = e.what();
  }

  result.final_answer = env->content(paths::kAnswer);
  result.final_workspace = env->snapshot();
  if (result.error.empty()) {
    result.verified_complete = stack.empty();
    result.termination =
        stack.empty() ? Termination::VerifiedComplete : Termination::HorizonExceeded;
    if (result.verified_complete) {
      if (cfg.answer_checker) {
        CheckResult check = cfg.answer_checker(result.final_answer);
        result.checker_accepted = check.accepted;
        result.check_reason = check.reason;
        result.success = check.accepted;
      } else {
        result.success = true;
      }
    }
  }
  return result;
}

double cumulative_reward(const EpisodeResult& result, const RewardConfig& cfg) {
  return cumulative_reward(result.success, result.iterations, cfg);
}

MethodLibrary make_no_tn_library(const MethodLibrary& full, std::string_view root_task) {
  const Method* root = find_first_relevant_method(TaskName(root_task), full);
  if (root == nullptr) {
    throw InvalidArgument("library has no method for \"" + std::string(root_task) + "\"");
  }
  Method single = *root;
  single.subtasks.clear();
  return MethodLibrary({std::move(single)});
}

std::function<double()> make_step_clock(double step, double start) {
  auto ticks = std::make_shared<std::uint64_t>(0);
  return [ticks, step, start] { return start + step * static_cast<double>((*ticks)++); };
}

nlohmann::json to_json(const PhaseTimes& t) {
  return {{"action_llm", t.action_llm},
          {"verify_llm", t.verify_llm},
          {"environment", t.environment},
          {"solver", t.solver}};
}

PhaseTimes phase_times_from_json(const nlohmann::json& j) {
  PhaseTimes t;
  t.action_llm = j.value("action_llm", 0.0);
  t.verify_llm = j.value("verify_llm", 0.0);
  t.environment = j.value("environment", 0.0);
  t.solver = j.value("solver", 0.0);
  return t;
}

nlohmann::json to_json(const TranscriptEntry& e) {
  nlohmann::json j{{"iteration", e.iteration}, {"task", e.task},     {"prompt", e.prompt},
                   {"response", e.response},   {"command", e.command}, {"trace", e.trace}};
  j["verified"] = e.verified ? nlohmann::json(*e.verified) : nlohmann::json(nullptr);
  return j;
}

}  // namespace htnagent
