#pragma once

// Uniform handle over the benchmark domains: instance generation,
// workspace manifest, bundled networks, ground-truth checking.

#include <cstdint>
#include <set>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <json.hpp>

#include "htnagent/blocksworld.hpp"
#include "htnagent/environment.hpp"
#include "htnagent/recipe.hpp"
#include "htnagent/task_network.hpp"
#include "htnagent/unit_movement.hpp"

namespace htnagent {

enum class DomainKind { BlocksWorld, UnitMovement, RecipeGenerator, TravelPlanner };

std::string_view domain_name(DomainKind d);  // "blocksworld", "unit-movement", ...
/// Also accepts "bw", "um", "rg", "tp".
std::optional<DomainKind> parse_domain(std::string_view name);

/// One grid cell's generator parameters. Only the fields of the chosen
/// domain are read.
struct DomainParams {
  int b = 3;
  int h = 3;
  int n = 1;
  int k = 1;
  int distractors = rg::kDefaultDistractors;
  bool teleport = false;

  /// "b=3,h=3", "n=10,k=6" or "d=3".
  std::string label(DomainKind d) const;
  nlohmann::json to_json(DomainKind d) const;
  static DomainParams from_json(const nlohmann::json& j);
};

struct DomainInstance {
  DomainKind kind = DomainKind::BlocksWorld;
  DomainParams params;
  std::uint64_t seed = 0;
  std::variant<bw::Instance, um::Instance, rg::Instance> data;
  std::string request;

  /// Workspace files. Recipe instances add solver.py, output.txt, the
  /// tools specification and the tool module with its database.
  FileManifest manifest() const;
  CheckResult check(std::string_view answer) const;
  /// A correct answer computed by the domain's own oracle.
  std::string oracle_answer() const;
  nlohmann::json describe() const;
};

/// Throws InvalidArgument for bad parameters or the travel-planner domain,
/// whose flight and hotel data are not bundled.
DomainInstance make_instance(DomainKind kind, const DomainParams& params, std::uint64_t seed);

std::string_view problem_spec(DomainKind kind);
std::optional<std::string_view> tools_spec(DomainKind kind);

/// Human-written network for the domain.
MethodLibrary human_network(DomainKind kind);
/// Bundled generated network when one ships (blocks world, unit movement).
std::optional<MethodLibrary> bundled_llm_network(DomainKind kind);

/// Paths that exist in the domain's workspace, for effect-file linting.
std::set<std::string> workspace_paths(DomainKind kind);

}  // namespace htnagent
