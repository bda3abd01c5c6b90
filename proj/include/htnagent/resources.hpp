#pragma once

// Files under resources/ compiled into the library: prompt templates,
// problem specifications, method networks, the recipe database and the
// recipe tool script.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace htnagent::resources {

/// Looks up a resource by its path relative to resources/, e.g.
/// "prompts/agent_prompt.txt".
std::optional<std::string_view> find(std::string_view name);

/// Like find() but throws htnagent::Error when the resource is missing.
std::string_view get(std::string_view name);

std::vector<std::string_view> names();

}  // namespace htnagent::resources
