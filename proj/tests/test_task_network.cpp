#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "htnagent/domain.hpp"
#include "htnagent/errors.hpp"
#include "htnagent/resources.hpp"
#include "htnagent/task_network.hpp"

using namespace htnagent;

namespace {

using Names = std::vector<std::string>;

MethodLibrary bundled(const char* name) {
  return load_method_library(resources::get(std::string("networks/") + name + ".json"));
}

// Completion order: verify the head, pop, re-decompose, until empty.
Names completion_order(const MethodLibrary& lib) {
  Names done;
  TaskStack s = update_task(TaskStack::single(TaskName("process user request"), lib), lib);
  while (!s.empty()) {
    done.push_back(s.head().task.str());
    s = update_task(s.popped(), lib);
  }
  return done;
}

// Index of the next entry above the subtree rooted at `idx` (head is index 0).
long consume_tree(const TaskStack& s, const MethodLibrary& lib, long idx) {
  const auto& e = s.entries();
  const StackEntry& entry = e[static_cast<std::size_t>(idx)];
  long j = idx - 1;
  if (!entry.decomposed) return j;
  const Method& m = lib.at(*entry.governing);
  long k = static_cast<long>(m.subtasks.size()) - 1;
  while (j >= 0 && k >= 0 && e[static_cast<std::size_t>(j)].task == m.subtasks[static_cast<std::size_t>(k)]) {
    j = consume_tree(s, lib, j);
    --k;
  }
  return j;
}

const char* kMinimal = R"({"method1": {"task": "a", "effect": "e", "effect_files": {"file1": "answer.txt"}}})";

}  // namespace

TEST(MethodLibrary, LoadsBlocksWorldHumanNetwork) {
  const auto lib = bundled("blocksworld_human");
  ASSERT_EQ(lib.size(), 5u);
  const Method& m1 = lib.at(0);
  EXPECT_EQ(m1.id, "method1");
  Names subs;
  for (const auto& s : m1.subtasks) subs.push_back(s.str());
  EXPECT_EQ(subs, (Names{"take notes on problem specification", "take notes on user request",
                         "unstack all blocks"}));
}

TEST(MethodLibrary, MethodWithoutSubtasksIsPrimitive) {
  const auto lib = load_method_library(kMinimal);
  ASSERT_EQ(lib.size(), 1u);
  EXPECT_TRUE(lib.at(0).is_primitive());
}

TEST(MethodLibrary, RejectsNumberingGap) {
  const char* doc = R"({"method1": {"task": "a", "effect": "e", "effect_files": {"file1": "answer.txt"},
                         "subtasks": {"subtask1": "x", "subtask3": "y"}}})";
  try {
    load_method_library(doc);
    FAIL() << "expected LibraryFormatError";
  } catch (const LibraryFormatError& e) {
    EXPECT_NE(std::string(e.what()).find("non-contiguous subtask numbering"), std::string::npos)
        << e.what();
  }
}

TEST(MethodLibrary, RejectsMalformedDocuments) {
  EXPECT_THROW(load_method_library("not json"), LibraryFormatError);
  EXPECT_THROW(load_method_library("[]"), LibraryFormatError);
  EXPECT_THROW(load_method_library(R"({"method1": {"task": "a", "effect_files": {"file1": "x"}}})"),
               LibraryFormatError);
}

TEST(MethodLibrary, NumericSubtaskOrderNotLexicographic) {
  std::string doc = R"({"method1": {"task": "a", "effect": "e", "effect_files": {"file1": "answer.txt"}, "subtasks": {)";
  for (int i = 12; i >= 1; --i) {
    doc += "\"subtask" + std::to_string(i) + "\": \"s" + std::to_string(i) + "\"";
    if (i > 1) doc += ",";
  }
  doc += "}}}";
  const auto asc = load_method_library(doc);
  EXPECT_EQ(asc.at(0).subtasks.front().str(), "s1");
  EXPECT_EQ(asc.at(0).subtasks.back().str(), "s12");
  const auto desc = load_method_library(doc, SubtaskOrder::Descending);
  EXPECT_EQ(desc.at(0).subtasks.front().str(), "s12");
}

TEST(MethodLibrary, DumpRoundTrips) {
  for (const char* n : {"blocksworld_human", "unit_movement_human", "unit_movement_llm",
                        "recipe_generator_human", "travel_planner_human"}) {
    const auto lib = bundled(n);
    const auto again = load_method_library(dump_method_library(lib));
    ASSERT_EQ(again.size(), lib.size()) << n;
    for (std::size_t i = 0; i < lib.size(); ++i) {
      EXPECT_EQ(again.at(i).id, lib.at(i).id);
      EXPECT_EQ(again.at(i).task, lib.at(i).task);
      EXPECT_EQ(again.at(i).subtasks, lib.at(i).subtasks);
      EXPECT_EQ(again.at(i).effect, lib.at(i).effect);
      EXPECT_EQ(again.at(i).effect_files, lib.at(i).effect_files);
    }
  }
}

TEST(FindFirstRelevantMethod, NormalizesCaseAndWhitespace) {
  const auto lib = bundled("blocksworld_human");
  const Method* m = find_first_relevant_method(TaskName("process user request"), lib);
  ASSERT_NE(m, nullptr);
  EXPECT_EQ(m->id, "method1");
  EXPECT_EQ(find_first_relevant_method(TaskName("Process User Request "), lib), m);
  EXPECT_EQ(find_first_relevant_method(TaskName("nonexistent task"), lib), nullptr);
}

TEST(FindFirstRelevantMethod, FirstInFileOrderWins) {
  const auto lib = load_method_library(R"({
    "method1": {"task": "t", "effect": "first", "effect_files": {"file1": "answer.txt"}},
    "method2": {"task": "T", "effect": "second", "effect_files": {"file1": "answer.txt"}}})");
  EXPECT_EQ(find_first_relevant_method(TaskName("t"), lib)->effect, "first");
}

// Expected stacks come from tests/oracles/expand_network.py.
TEST(UpdateTask, BlocksWorldInitialStack) {
  const auto lib = bundled("blocksworld_human");
  const auto s = update_task(TaskStack::single(TaskName("process user request"), lib), lib);
  EXPECT_EQ(s.task_names(), (Names{"take notes on problem specification", "take notes on user request",
                                   "unstack all blocks", "process user request"}));
  EXPECT_EQ(completion_order(lib), s.task_names());
}

TEST(UpdateTask, UnitMovementExpandsMoveUnitsWhenReached) {
  const auto lib = bundled("unit_movement_human");
  const auto s = update_task(TaskStack::single(TaskName("process user request"), lib), lib);
  EXPECT_EQ(s.task_names(), (Names{"take notes on problem specification", "take notes on user request",
                                   "group units", "move units", "process user request"}));
  EXPECT_EQ(completion_order(lib),
            (Names{"take notes on problem specification", "take notes on user request", "group units",
                   "move group 1", "move group 2", "move group 3", "move units",
                   "process user request"}));
}

TEST(UpdateTask, EmptyStackIsNoop) {
  const auto lib = bundled("blocksworld_human");
  EXPECT_TRUE(update_task(TaskStack{}, lib).empty());
}

TEST(UpdateTask, SelfFirstSubtaskHitsDepthGuard) {
  const auto lib = load_method_library(R"({"method1": {"task": "A", "effect": "e",
      "effect_files": {"file1": "answer.txt"}, "subtasks": {"subtask1": "A", "subtask2": "B"}}})");
  try {
    update_task(TaskStack::single(TaskName("A"), lib), lib);
    FAIL() << "expected DecompositionDepthExceeded";
  } catch (const DecompositionDepthExceeded& e) {
    EXPECT_NE(std::string(e.what()).find("decomposition-depth exceeded"), std::string::npos);
  }
}

TEST(UpdateTask, IdentityWithoutRelevantMethod) {
  const auto lib = bundled("blocksworld_human");
  const auto s = update_task(TaskStack::single(TaskName("something else"), lib), lib);
  EXPECT_EQ(s.task_names(), Names{"something else"});
  EXPECT_FALSE(s.head().governing.has_value());
}

TEST(UpdateTask, DanglingLeafIsGovernedByParent) {
  const auto lib = load_method_library(R"({"method1": {"task": "root", "effect": "root done",
      "effect_files": {"file1": "answer.txt"}, "subtasks": {"subtask1": "ghost task"}}})");
  const auto s = update_task(TaskStack::single(TaskName("root"), lib), lib);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_FALSE(s.head().has_own_method);
  EXPECT_EQ(governing_method(s, lib)->effect, "root done");
}

// Properties over every bundled network and every reachable stack.
TEST(UpdateTaskProperties, IdempotentOrderedAndNoResurrection) {
  for (const char* n : {"blocksworld_human", "blocksworld_llm", "unit_movement_human",
                        "unit_movement_llm", "recipe_generator_human", "travel_planner_human"}) {
    const auto lib = bundled(n);
    TaskStack s = update_task(TaskStack::single(TaskName("process user request"), lib), lib);
    std::size_t pops = 0;
    Names popped;
    while (!s.empty()) {
      EXPECT_EQ(update_task(s, lib).task_names(), s.task_names()) << n;
      // The whole stack parses as one tree: every decomposed entry has a
      // suffix of its method's subtasks directly above it, in order.
      EXPECT_EQ(consume_tree(s, lib, static_cast<long>(s.size()) - 1), -1) << n;
      popped.push_back(s.head().task.str());
      s = update_task(s.popped(), lib);
      ASSERT_LT(++pops, 100u) << n;
    }
    EXPECT_EQ(popped.back(), "process user request") << n;
    const std::set<std::string> distinct(popped.begin(), popped.end());
    EXPECT_EQ(distinct.size(), popped.size()) << n << ": a completed task came back";
  }
}

TEST(ValidateLibrary, UnitMovementIsClean) {
  const auto r = validate_library(bundled("unit_movement_human"), workspace_paths(DomainKind::UnitMovement));
  EXPECT_TRUE(r.cycles.empty());
  EXPECT_TRUE(r.dangling_subtasks.empty());
  EXPECT_TRUE(r.unknown_effect_files.empty());
}

TEST(ValidateLibrary, ReportsDanglingSubtask) {
  const auto lib = load_method_library(R"({"method1": {"task": "root", "effect": "e",
      "effect_files": {"file1": "answer.txt"}, "subtasks": {"subtask1": "ghost task"}}})");
  const auto r = validate_library(lib);
  EXPECT_EQ(r.dangling_subtasks, Names{"ghost task"});
  EXPECT_FALSE(r.has_errors());
}

TEST(ValidateLibrary, ReportsTwoCycle) {
  const auto lib = load_method_library(R"({
    "method1": {"task": "A", "effect": "e", "effect_files": {"file1": "answer.txt"}, "subtasks": {"subtask1": "B"}},
    "method2": {"task": "B", "effect": "e", "effect_files": {"file1": "answer.txt"}, "subtasks": {"subtask1": "A"}}})");
  const auto r = validate_library(lib);
  ASSERT_EQ(r.cycles.size(), 1u);
  EXPECT_EQ(r.cycles[0].size(), 2u);
  EXPECT_TRUE(r.has_errors());
}

TEST(ValidateLibrary, FlagsUnknownEffectFiles) {
  const auto lib = load_method_library(R"({"method1": {"task": "a", "effect": "e",
      "effect_files": {"file1": "files/nowhere.txt"}}})");
  const auto r = validate_library(lib, workspace_paths(DomainKind::BlocksWorld));
  ASSERT_EQ(r.unknown_effect_files.size(), 1u);
  EXPECT_EQ(r.unknown_effect_files[0].second, "files/nowhere.txt");
}
