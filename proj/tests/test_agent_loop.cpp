#include <gtest/gtest.h>

#include "episode_fixture.hpp"
#include "htnagent/agent_loop.hpp"
#include "htnagent/domain.hpp"
#include "htnagent/errors.hpp"
#include "htnagent/verifier.hpp"
#include "test_util.hpp"

using namespace htnagent;
using testutil::act;

namespace {

const char* kPass = "ANALYSIS: ok\nPASS: TRUE";
const char* kFail = "ANALYSIS: not yet\nPASS: FALSE";

EpisodeConfig base_config(Backend& actor, Backend& verifier, MethodLibrary lib,
                          Condition cond = Condition::HumanTn) {
  EpisodeConfig c;
  c.condition = cond;
  c.library = std::move(lib);
  c.actor = &actor;
  c.verifier = &verifier;
  c.manifest = make_manifest("spec", "request");
  c.clock = make_step_clock();
  return c;
}

MethodLibrary three_leaf() {
  return load_method_library(R"({
    "method1": {"task": "process user request", "effect": "answer written",
                "effect_files": {"file1": "answer.txt"},
                "subtasks": {"subtask1": "notes on spec", "subtask2": "notes on request", "subtask3": "answer"}},
    "method2": {"task": "notes on spec", "effect": "notes have spec", "effect_files": {"file1": "files/notes.txt"}},
    "method3": {"task": "notes on request", "effect": "notes have request", "effect_files": {"file1": "files/notes.txt"}},
    "method4": {"task": "answer", "effect": "answer has plan", "effect_files": {"file1": "answer.txt"}}})");
}

}  // namespace

class EpisodeFixture : public ::testing::TestWithParam<const char*> {};

TEST_P(EpisodeFixture, MatchesFrozenRecord) {
  const auto run = testutil::run_fixture(testutil::data_path(std::string("episodes/") + GetParam() + ".json"));
  EXPECT_EQ(testutil::fixture_mismatch(run), "");
  EXPECT_LT(run.seconds, 5.0);
  EXPECT_EQ(run.result.actor_calls, static_cast<std::size_t>(run.result.iterations));
}

INSTANTIATE_TEST_SUITE_P(Domains, EpisodeFixture,
                         ::testing::Values("blocksworld", "unit_movement", "recipe_generator"));

TEST(RunEpisode, ThreeLeafTranscriptWithRootVerify) {
  ScriptedBackend actor({act(Action::read("files/problem_specification.txt")),
                         act(Action::append("files/notes.txt", "spec notes\n")), act(Action::verify()),
                         act(Action::read("files/request.txt")),
                         act(Action::append("files/notes.txt", "request notes\n")), act(Action::verify()),
                         act(Action::write("answer.txt", "pick red\n")), act(Action::verify()),
                         act(Action::verify())});
  ScriptedBackend verifier({kPass, kPass, kPass, kPass});
  const auto r = run_episode(base_config(actor, verifier, three_leaf()));
  EXPECT_TRUE(r.success);
  EXPECT_EQ(r.termination, Termination::VerifiedComplete);
  EXPECT_EQ(r.iterations, 9);
  EXPECT_EQ(r.completed_tasks,
            (std::vector<std::string>{"notes on spec", "notes on request", "answer", "process user request"}));
  EXPECT_EQ(r.final_workspace.at("files/notes.txt"), "spec notes\nrequest notes\n");
  EXPECT_EQ(r.final_answer, "pick red\n");
  EXPECT_EQ(actor.remaining(), 0u);
  EXPECT_EQ(r.verifier_calls, 4u);
}

TEST(RunEpisode, PromptCarriesTaskMemoryAndTrace) {
  ScriptedBackend actor({act(Action::read("files/request.txt"), "first"), act(Action::verify())});
  ScriptedBackend verifier({kPass});
  auto cfg = base_config(actor, verifier, make_no_tn_library(three_leaf()), Condition::NoTn);
  run_episode(cfg);
  const auto prompts = actor.prompts();
  ASSERT_EQ(prompts.size(), 2u);
  PromptContext first;
  first.current_task = "process user request";
  first.current_effect = "answer written";
  EXPECT_EQ(prompts[0], render_agent_prompt(first));
  PromptContext second = first;
  second.last_response = act(Action::read("files/request.txt"), "first");
  second.last_commands = {"Read files/request.txt"};
  second.last_output = "Contents of files/request.txt:\n1: request\n";
  EXPECT_EQ(prompts[1], render_agent_prompt(second));
}

TEST(RunEpisode, LoopingActorHitsHorizon) {
  FunctionBackend actor([](const std::string&) { return act(Action::read("files/request.txt")); });
  ScriptedBackend verifier({});
  const auto cfg = base_config(actor, verifier, three_leaf());
  const auto r = run_episode(cfg);
  EXPECT_FALSE(r.success);
  EXPECT_EQ(r.termination, Termination::HorizonExceeded);
  EXPECT_EQ(r.iterations, 100);
  EXPECT_EQ(r.command_log.size(), 100u);
  EXPECT_NEAR(cumulative_reward(r, cfg.reward), -10.0, 1e-9);
  EXPECT_EQ(r.verifier_calls, 0u);
}

TEST(RunEpisode, NoTnMinimalSuccessInTwoIterations) {
  ScriptedBackend actor({act(Action::write("answer.txt", "done")), act(Action::verify())});
  ScriptedBackend verifier({kPass});
  auto cfg = base_config(actor, verifier, make_no_tn_library(three_leaf()), Condition::NoTn);
  const auto r = run_episode(cfg);
  EXPECT_TRUE(r.success);
  EXPECT_EQ(r.iterations, 2);
  EXPECT_EQ(r.max_stack_size, 1u);
  EXPECT_DOUBLE_EQ(cumulative_reward(r, cfg.reward), 1.0 - 0.1);
}

TEST(RunEpisode, NoTnRejectsDecomposableLibrary) {
  ScriptedBackend actor({}), verifier({});
  EXPECT_THROW(run_episode(base_config(actor, verifier, three_leaf(), Condition::NoTn)), ConfigError);
}

TEST(RunEpisode, FailedVerifyKeepsTaskAndFeedsBack) {
  ScriptedBackend actor({act(Action::verify()), act(Action::write("answer.txt", "x")), act(Action::verify())});
  ScriptedBackend verifier({kFail, kPass});
  const auto r = run_episode(base_config(actor, verifier, make_no_tn_library(three_leaf()), Condition::NoTn));
  EXPECT_TRUE(r.success);
  EXPECT_EQ(r.iterations, 3);
  ASSERT_EQ(r.transcript.size(), 3u);
  EXPECT_EQ(r.transcript[0].trace, kFail);
  EXPECT_EQ(r.transcript[0].verified, false);
  EXPECT_EQ(r.completed_tasks.size(), 1u);
}

TEST(RunEpisode, ParseFailureConsumesStep) {
  ScriptedBackend actor({"not json at all", act(Action::verify())});
  ScriptedBackend verifier({kPass});
  const auto r = run_episode(base_config(actor, verifier, make_no_tn_library(three_leaf()), Condition::NoTn));
  EXPECT_EQ(r.iterations, 2);
  EXPECT_EQ(r.command_log.front(), std::string(kParseErrorCommand));
  EXPECT_EQ(r.transcript[0].trace.rfind("JSONDecode error", 0), 0u);
  EXPECT_EQ(r.final_workspace.at("files/notes.txt"), "");
}

TEST(RunEpisode, CheckerDecidesSuccess) {
  ScriptedBackend actor({act(Action::write("answer.txt", "wrong")), act(Action::verify())});
  ScriptedBackend verifier({kPass});
  auto cfg = base_config(actor, verifier, make_no_tn_library(three_leaf()), Condition::NoTn);
  cfg.answer_checker = [](const std::string& a) {
    return a == "right" ? CheckResult::accept() : CheckResult::reject("bad answer");
  };
  const auto r = run_episode(cfg);
  EXPECT_TRUE(r.verified_complete);
  EXPECT_EQ(r.termination, Termination::VerifiedComplete);
  EXPECT_FALSE(r.success);
  EXPECT_EQ(r.check_reason, "bad answer");
}

TEST(RunEpisode, BackendExhaustionIsInfrastructureError) {
  ScriptedBackend actor({act(Action::read("files/request.txt"))});
  ScriptedBackend verifier({});
  const auto r = run_episode(base_config(actor, verifier, three_leaf()));
  EXPECT_EQ(r.termination, Termination::InfrastructureError);
  EXPECT_FALSE(r.success);
  EXPECT_FALSE(r.error.empty());
  EXPECT_EQ(r.iterations, 1);
}

TEST(RunEpisode, CyclicLibraryIsInfrastructureError) {
  const auto lib = load_method_library(R"({"method1": {"task": "process user request", "effect": "e",
      "effect_files": {"file1": "answer.txt"}, "subtasks": {"subtask1": "process user request"}}})");
  ScriptedBackend actor({}), verifier({});
  const auto r = run_episode(base_config(actor, verifier, lib));
  EXPECT_EQ(r.termination, Termination::InfrastructureError);
  EXPECT_EQ(r.iterations, 0);
}

TEST(RunEpisode, HorizonOfOne) {
  ScriptedBackend actor({act(Action::write("answer.txt", "x")), act(Action::verify())});
  ScriptedBackend verifier({kPass});
  auto cfg = base_config(actor, verifier, make_no_tn_library(three_leaf()), Condition::NoTn);
  cfg.reward.horizon = 1;
  const auto r = run_episode(cfg);
  EXPECT_EQ(r.termination, Termination::HorizonExceeded);
  EXPECT_EQ(r.iterations, 1);
}

TEST(RunEpisode, BitReproducibleWithStepClock) {
  auto once = [] {
    ScriptedBackend actor({act(Action::read("files/problem_specification.txt")),
                           act(Action::append("files/notes.txt", "n")), act(Action::verify()),
                           act(Action::verify()), act(Action::write("answer.txt", "a")), act(Action::verify()),
                           act(Action::verify())});
    ScriptedBackend verifier({kPass, kPass, kPass, kPass});
    return run_episode(base_config(actor, verifier, three_leaf()));
  };
  const auto a = once();
  const auto b = once();
  EXPECT_EQ(a.wall_times, b.wall_times);
  EXPECT_EQ(a.command_log, b.command_log);
  EXPECT_EQ(a.final_workspace, b.final_workspace);
  EXPECT_EQ(a.iterations, b.iterations);
  ASSERT_EQ(a.transcript.size(), b.transcript.size());
  for (std::size_t i = 0; i < a.transcript.size(); ++i) {
    EXPECT_EQ(to_json(a.transcript[i]), to_json(b.transcript[i]));
  }
}

TEST(RunEpisode, StackOnlyShrinksOnVerifiedPops) {
  // A policy that alternates actions and verifies against a verifier that
  // says yes every third time; completed tasks follow the network order.
  int n = 0;
  FunctionBackend actor([&n](const std::string&) {
    return ++n % 2 ? act(Action::append("files/notes.txt", "x")) : act(Action::verify());
  });
  int v = 0;
  FunctionBackend verifier([&v](const std::string&) { return ++v % 3 == 0 ? kPass : kFail; });
  const auto r = run_episode(base_config(actor, verifier, three_leaf()));
  EXPECT_TRUE(r.verified_complete);
  EXPECT_EQ(r.completed_tasks,
            (std::vector<std::string>{"notes on spec", "notes on request", "answer", "process user request"}));
  EXPECT_EQ(r.verifier_calls, 12u);
  EXPECT_EQ(r.iterations, 24);
}

TEST(Reward, FromEpisodeResult) {
  EpisodeResult r;
  r.success = true;
  r.iterations = 20;
  EXPECT_NEAR(cumulative_reward(r, RewardConfig{}), -0.9, 1e-12);
}

TEST(NoTnLibrary, KeepsOnlyRootWithoutSubtasks) {
  const auto lib = make_no_tn_library(human_network(DomainKind::BlocksWorld));
  ASSERT_EQ(lib.size(), 1u);
  EXPECT_TRUE(lib.at(0).is_primitive());
  EXPECT_EQ(lib.at(0).task.str(), "process user request");
  EXPECT_EQ(lib.at(0).effect, human_network(DomainKind::BlocksWorld).at(0).effect);
}

TEST(Names, ConditionAndTerminationRoundTrip) {
  for (auto c : {Condition::HumanTn, Condition::LlmTn, Condition::NoTn}) {
    EXPECT_EQ(parse_condition(condition_name(c)), c);
  }
  for (auto t : {Termination::VerifiedComplete, Termination::HorizonExceeded, Termination::InfrastructureError}) {
    EXPECT_EQ(parse_termination(termination_name(t)), t);
  }
  EXPECT_EQ(termination_name(Termination::HorizonExceeded), "horizon-exceeded");
}
