#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "htnagent/agent_loop.hpp"

namespace htnagent::rg {

/// Dish name -> ingredient list, from `dish<TAB>ing1|ing2|...` lines.
class RecipeDb {
 public:
  /// Throws InvalidArgument on a malformed line, a dish without
  /// ingredients, or a repeated dish.
  static RecipeDb parse(std::string_view tsv);
  /// The database compiled into the library.
  static std::shared_ptr<const RecipeDb> bundled();

  const std::vector<std::string>& dishes() const noexcept { return order_; }
  /// Every distinct ingredient, sorted.
  std::vector<std::string> all_ingredients() const;
  std::size_t size() const noexcept { return order_.size(); }

  /// Exact lookups; unknown keys give an empty list.
  std::vector<std::string> ingredients_of(std::string_view dish) const;
  std::vector<std::string> dishes_with(std::string_view ingredient) const;
  /// Trimmed, case-insensitive dish lookup; returns the canonical name.
  std::optional<std::string> find_dish(std::string_view name) const;

 private:
  std::vector<std::string> order_;
  std::map<std::string, std::vector<std::string>, std::less<>> ingredients_;
  std::map<std::string, std::vector<std::string>, std::less<>> by_ingredient_;
};

std::vector<std::string> tool_get_ingredients(const RecipeDb& db, std::string_view dish);
std::vector<std::string> tool_get_dishes(const RecipeDb& db, std::string_view ingredient);

inline constexpr int kDefaultDistractors = 3;

struct Instance {
  std::shared_ptr<const RecipeDb> db;
  std::vector<std::string> ingredients;  // shuffled
  std::string witness;
};

/// Throws InvalidArgument for an empty db, negative count, or too few
/// ingredients outside the witness dish.
Instance generate(std::shared_ptr<const RecipeDb> db, int distractors, std::uint64_t seed);

std::string render_request(const Instance& inst);

CheckResult check(const Instance& inst, std::string_view answer);

}  // namespace htnagent::rg
