#pragma once

#include <string>

#include "htnagent/llm_gateway.hpp"
#include "htnagent/text.hpp"

namespace testutil {

inline std::string data_path(const std::string& name) {
  return std::string(HTNAGENT_TEST_DATA) + "/" + name;
}

inline std::string read_data(const std::string& name) {
  return htnagent::text::read_file(data_path(name));
}

inline std::string act(htnagent::Action a, std::string thought = "") {
  htnagent::AgentResponse r;
  r.thought = std::move(thought);
  r.action = std::move(a);
  return htnagent::format_agent_response(r);
}

}  // namespace testutil
