#include "htnagent/resources.hpp"

#include "htnagent/errors.hpp"

namespace htnagent::resources {

std::string_view get(std::string_view name) {
  if (auto r = find(name)) return *r;
  throw Error("missing bundled resource: " + std::string(name));
}

}  // namespace htnagent::resources
