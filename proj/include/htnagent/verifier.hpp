#pragma once

// The verify action: effect-file context, verifier prompt, verdict.

#include <string>
#include <string_view>
#include <vector>

#include "htnagent/environment.hpp"
#include "htnagent/llm_gateway.hpp"
#include "htnagent/task_network.hpp"

namespace htnagent {

inline constexpr std::string_view kPassMarker = "PASS: TRUE";
inline constexpr std::string_view kMissingFileMarker = "[file not present in workspace]";

struct VerifyOutcome {
  bool verified = false;
  std::string feedback;
};

std::string_view verify_prompt_template();

/// Header name for an effect file: the path without its extension, so
/// "files/notes.txt" becomes "files/notes".
std::string effect_file_label(std::string_view path);

/// One "## Here are the contents of <label>: " section per file, in order.
std::string render_effect_files(const std::vector<std::string>& effect_files,
                                const Environment& env);

std::string render_verify_prompt(std::string_view effect,
                                 const std::vector<std::string>& effect_files,
                                 const Environment& env);

/// Literal substring test.
bool is_pass(std::string_view reply);

/// Calls the backend once. A null method or one without an effect yields
/// verified=false without calling it. Transport errors propagate.
VerifyOutcome verify_task(Backend& backend, const Method* method, const Environment& env);

}  // namespace htnagent
