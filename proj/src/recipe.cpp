#include "htnagent/recipe.hpp"

#include <algorithm>
#include <set>

#include "htnagent/errors.hpp"
#include "htnagent/resources.hpp"
#include "htnagent/rng.hpp"
#include "htnagent/text.hpp"

namespace htnagent::rg {

RecipeDb RecipeDb::parse(std::string_view tsv) {
  RecipeDb db;
  int line_no = 0;
  for (const auto& line : text::split_lines(tsv)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw InvalidArgument("recipe db line " + std::to_string(line_no) + ": missing tab");
    }
    std::string dish(text::trim(std::string_view(line).substr(0, tab)));
    std::vector<std::string> ings;
    std::string_view rest = std::string_view(line).substr(tab + 1);
    while (!rest.empty()) {
      const auto bar = rest.find('|');
      auto part = text::trim(rest.substr(0, bar));
      if (!part.empty() && std::find(ings.begin(), ings.end(), part) == ings.end()) {
        ings.emplace_back(part);
      }
      if (bar == std::string_view::npos) break;
      rest.remove_prefix(bar + 1);
    }
    if (dish.empty() || ings.empty()) {
      throw InvalidArgument("recipe db line " + std::to_string(line_no) + ": empty dish or ingredients");
    }
    if (db.ingredients_.count(dish)) throw InvalidArgument("recipe db: repeated dish " + dish);
    for (const auto& i : ings) db.by_ingredient_[i].push_back(dish);
    db.order_.push_back(dish);
    db.ingredients_.emplace(std::move(dish), std::move(ings));
  }
  return db;
}

std::shared_ptr<const RecipeDb> RecipeDb::bundled() {
  static const auto db =
      std::make_shared<const RecipeDb>(parse(resources::get("data/recipes.tsv")));
  return db;
}

std::vector<std::string> RecipeDb::all_ingredients() const {
  std::vector<std::string> out;
  for (const auto& [i, dishes] : by_ingredient_) out.push_back(i);
  return out;
}

std::vector<std::string> RecipeDb::ingredients_of(std::string_view dish) const {
  auto it = ingredients_.find(dish);
  return it == ingredients_.end() ? std::vector<std::string>{} : it->second;
}

std::vector<std::string> RecipeDb::dishes_with(std::string_view ingredient) const {
  auto it = by_ingredient_.find(ingredient);
  return it == by_ingredient_.end() ? std::vector<std::string>{} : it->second;
}

std::optional<std::string> RecipeDb::find_dish(std::string_view name) const {
  const std::string key = text::to_lower(text::trim(name));
  for (const auto& d : order_) {
    if (text::to_lower(d) == key) return d;
  }
  return std::nullopt;
}

std::vector<std::string> tool_get_ingredients(const RecipeDb& db, std::string_view dish) {
  return db.ingredients_of(dish);
}

std::vector<std::string> tool_get_dishes(const RecipeDb& db, std::string_view ingredient) {
  return db.dishes_with(ingredient);
}

Instance generate(std::shared_ptr<const RecipeDb> db, int distractors, std::uint64_t seed) {
  if (!db || db->size() == 0) throw InvalidArgument("recipe db is empty");
  if (distractors < 0) throw InvalidArgument("distractor count must be non-negative");
  Rng rng(seed);
  Instance inst;
  inst.witness = db->dishes()[rng.index(db->size())];
  inst.ingredients = db->ingredients_of(inst.witness);

  std::vector<std::string> pool;
  for (const auto& i : db->all_ingredients()) {
    if (std::find(inst.ingredients.begin(), inst.ingredients.end(), i) == inst.ingredients.end()) {
      pool.push_back(i);
    }
  }
  if (pool.size() < static_cast<std::size_t>(distractors)) {
    throw InvalidArgument("insufficient distractor pool: need " + std::to_string(distractors) +
                          ", have " + std::to_string(pool.size()));
  }
  for (auto& extra : rng.sample(pool, static_cast<std::size_t>(distractors))) {
    inst.ingredients.push_back(std::move(extra));
  }
  rng.shuffle(inst.ingredients);
  inst.db = std::move(db);
  return inst;
}

std::string render_request(const Instance& inst) {
  std::string out = "Hello, I'd like to request a recipe for the following ingredients: \n";
  for (const auto& i : inst.ingredients) out += i + "\n";
  return out;
}

CheckResult check(const Instance& inst, std::string_view answer) {
  auto dish = inst.db->find_dish(answer);
  if (!dish) return CheckResult::reject("unknown dish: " + std::string(text::trim(answer)));
  const std::set<std::string> have(inst.ingredients.begin(), inst.ingredients.end());
  std::vector<std::string> missing;
  for (const auto& i : inst.db->ingredients_of(*dish)) {
    if (!have.count(i)) missing.push_back(i);
  }
  if (!missing.empty()) return CheckResult::reject("missing ingredients: " + text::join(missing, ", "));
  return CheckResult::accept();
}

}  // namespace htnagent::rg
