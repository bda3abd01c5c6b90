#include "htnagent/domain.hpp"

#include "htnagent/errors.hpp"
#include "htnagent/resources.hpp"
#include "htnagent/text.hpp"

namespace htnagent {

namespace {

constexpr std::string_view kToolModule = "tools/recipes.py";
constexpr std::string_view kToolDb = "tools/recipes.tsv";

std::string_view network_resource(DomainKind kind) {
  switch (kind) {
    case DomainKind::BlocksWorld: return "networks/blocksworld_human.json";
    case DomainKind::UnitMovement: return "networks/unit_movement_human.json";
    case DomainKind::RecipeGenerator: return "networks/recipe_generator_human.json";
    case DomainKind::TravelPlanner: return "networks/travel_planner_human.json";
  }
  return {};
}

}  // namespace

std::string_view domain_name(DomainKind d) {
  switch (d) {
    case DomainKind::BlocksWorld: return "blocksworld";
    case DomainKind::UnitMovement: return "unit-movement";
    case DomainKind::RecipeGenerator: return "recipe-generator";
    case DomainKind::TravelPlanner: return "travel-planner";
  }
  return "blocksworld";
}

std::optional<DomainKind> parse_domain(std::string_view name) {
  const std::string n = text::to_lower(text::trim(name));
  if (n == "blocksworld" || n == "bw") return DomainKind::BlocksWorld;
  if (n == "unit-movement" || n == "um") return DomainKind::UnitMovement;
  if (n == "recipe-generator" || n == "rg") return DomainKind::RecipeGenerator;
  if (n == "travel-planner" || n == "tp") return DomainKind::TravelPlanner;
  return std::nullopt;
}

std::string DomainParams::label(DomainKind d) const {
  switch (d) {
    case DomainKind::BlocksWorld: return "b=" + std::to_string(b) + ",h=" + std::to_string(h);
    case DomainKind::UnitMovement: return "n=" + std::to_string(n) + ",k=" + std::to_string(k);
    case DomainKind::RecipeGenerator: return "d=" + std::to_string(distractors);
    case DomainKind::TravelPlanner: return "tp";
  }
  return {};
}

nlohmann::json DomainParams::to_json(DomainKind d) const {
  switch (d) {
    case DomainKind::BlocksWorld: return {{"b", b}, {"h", h}};
    case DomainKind::UnitMovement: return {{"n", n}, {"k", k}, {"teleport", teleport}};
    case DomainKind::RecipeGenerator: return {{"distractors", distractors}};
    case DomainKind::TravelPlanner: return nlohmann::json::object();
  }
  return nlohmann::json::object();
}

DomainParams DomainParams::from_json(const nlohmann::json& j) {
  DomainParams p;
  p.b = j.value("b", p.b);
  p.h = j.value("h", p.h);
  p.n = j.value("n", p.n);
  p.k = j.value("k", p.k);
  p.distractors = j.value("distractors", p.distractors);
  p.teleport = j.value("teleport", p.teleport);
  return p;
}

std::string_view problem_spec(DomainKind kind) {
  switch (kind) {
    case DomainKind::BlocksWorld: return resources::get("domains/blocksworld_spec.txt");
    case DomainKind::UnitMovement: return resources::get("domains/unit_movement_spec.txt");
    case DomainKind::RecipeGenerator: return resources::get("domains/recipe_generator_spec.txt");
    case DomainKind::TravelPlanner: return resources::get("domains/travel_planner_spec.txt");
  }
  return {};
}

std::optional<std::string_view> tools_spec(DomainKind kind) {
  if (kind == DomainKind::RecipeGenerator) {
    return resources::get("domains/recipe_generator_tools_spec.txt");
  }
  return std::nullopt;
}

MethodLibrary human_network(DomainKind kind) {
  return load_method_library(resources::get(network_resource(kind)));
}

std::optional<MethodLibrary> bundled_llm_network(DomainKind kind) {
  if (kind == DomainKind::BlocksWorld) {
    return load_method_library(resources::get("networks/blocksworld_llm.json"));
  }
  if (kind == DomainKind::UnitMovement) {
    return load_method_library(resources::get("networks/unit_movement_llm.json"));
  }
  return std::nullopt;
}

std::set<std::string> workspace_paths(DomainKind kind) {
  std::set<std::string> out{std::string(paths::kProblemSpec), std::string(paths::kRequest),
                            std::string(paths::kNotes), std::string(paths::kAnswer)};
  if (kind == DomainKind::RecipeGenerator || kind == DomainKind::TravelPlanner) {
    out.insert(std::string(paths::kToolsSpec));
    out.insert(std::string(paths::kSolver));
    out.insert(std::string(paths::kOutput));
  }
  if (kind == DomainKind::RecipeGenerator) {
    out.insert(std::string(kToolModule));
    out.insert(std::string(kToolDb));
  }
  return out;
}

DomainInstance make_instance(DomainKind kind, const DomainParams& params, std::uint64_t seed) {
  DomainInstance inst;
  inst.kind = kind;
  inst.params = params;
  inst.seed = seed;
  switch (kind) {
    case DomainKind::BlocksWorld: {
      auto bwi = bw::generate(params.b, params.h, seed);
      inst.request = bw::render_request(bwi);
      inst.data = std::move(bwi);
      break;
    }
    case DomainKind::UnitMovement: {
      auto umi = um::generate(params.n, params.k, seed);
      inst.request = um::render_request(umi);
      inst.data = std::move(umi);
      break;
    }
    case DomainKind::RecipeGenerator: {
      auto rgi = rg::generate(rg::RecipeDb::bundled(), params.distractors, seed);
      inst.request = rg::render_request(rgi);
      inst.data = std::move(rgi);
      break;
    }
    case DomainKind::TravelPlanner:
      throw InvalidArgument("travel-planner instances need the external flight and hotel dataset");
  }
  return inst;
}

FileManifest DomainInstance::manifest() const {
  const std::string spec(problem_spec(kind));
  if (kind != DomainKind::RecipeGenerator) return make_manifest(spec, request);
  FileManifest extra{
      {std::string(kToolModule), std::string(resources::get("tools/recipes.py")), FileMode::ReadOnly},
      {std::string(kToolDb), std::string(resources::get("data/recipes.tsv")), FileMode::ReadOnly}};
  return make_manifest(spec, request, std::string(*tools_spec(kind)), true, std::move(extra));
}

CheckResult DomainInstance::check(std::string_view answer) const {
  if (auto* b = std::get_if<bw::Instance>(&data)) return bw::check(*b, answer);
  if (auto* u = std::get_if<um::Instance>(&data)) {
    return um::check(*u, answer, um::CheckOptions{params.teleport});
  }
  return rg::check(std::get<rg::Instance>(data), answer);
}

std::string DomainInstance::oracle_answer() const {
  if (auto* b = std::get_if<bw::Instance>(&data)) {
    return bw::plan_text(b->size() <= bw::kOracleBound ? bw::bfs_plan(*b) : bw::constructive_plan(*b));
  }
  if (auto* u = std::get_if<um::Instance>(&data)) {
    auto moves = um::solve(*u, um::CheckOptions{params.teleport});
    if (!moves) throw Error("unit movement instance has no covering assignment");
    return um::moves_json(*moves);
  }
  return std::get<rg::Instance>(data).witness;
}

nlohmann::json DomainInstance::describe() const {
  nlohmann::json j{{"domain", domain_name(kind)}, {"params", params.to_json(kind)}, {"seed", seed}};
  if (auto* b = std::get_if<bw::Instance>(&data)) {
    j["stacks"] = b->stacks;
    j["goal"] = b->goal;
  } else if (auto* u = std::get_if<um::Instance>(&data)) {
    j["nodes"] = u->nodes;
    j["adjacency"] = u->adj;
    j["extra_edges"] = u->extra_edges;
    nlohmann::json units = nlohmann::json::array();
    for (const auto& unit : u->units) {
      units.push_back({{"unit_id", unit.id}, {"location", u->nodes[static_cast<std::size_t>(unit.start)]}});
    }
    j["units"] = units;
  } else {
    const auto& r = std::get<rg::Instance>(data);
    j["ingredients"] = r.ingredients;
    j["witness"] = r.witness;
  }
  return j;
}

}  // namespace htnagent
