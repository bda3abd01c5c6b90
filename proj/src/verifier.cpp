#include "htnagent/verifier.hpp"

#include "htnagent/resources.hpp"
#include "htnagent/text.hpp"

namespace htnagent {

std::string_view verify_prompt_template() { return resources::get("prompts/verify_prompt.txt"); }

std::string effect_file_label(std::string_view path) {
  const auto slash = path.rfind('/');
  const auto dot = path.rfind('.');
  if (dot == std::string_view::npos || (slash != std::string_view::npos && dot < slash) ||
      dot == (slash == std::string_view::npos ? 0 : slash + 1)) {
    return std::string(path);
  }
  return std::string(path.substr(0, dot));
}

std::string render_effect_files(const std::vector<std::string>& effect_files,
                                const Environment& env) {
  std::string out;
  for (const auto& path : effect_files) {
    out += "## Here are the contents of " + effect_file_label(path) + ": \n";
    if (env.has_file(path)) {
      out += env.content(path);
    } else {
      out += kMissingFileMarker;
    }
    out += "\n";
  }
  return out;
}

std::string render_verify_prompt(std::string_view effect,
                                 const std::vector<std::string>& effect_files,
                                 const Environment& env) {
  return text::format_positional(verify_prompt_template(),
                                 {std::string(effect), render_effect_files(effect_files, env)});
}

bool is_pass(std::string_view reply) { return reply.find(kPassMarker) != std::string_view::npos; }

VerifyOutcome verify_task(Backend& backend, const Method* method, const Environment& env) {
  if (method == nullptr) {
    return {false, "Verification failed: the current task has no method describing its effect."};
  }
  if (text::trim(method->effect).empty()) {
    return {false, "Verification failed: the method for \"" + method->task.str() +
                       "\" has no effect to check."};
  }
  const std::string reply =
      backend.complete(render_verify_prompt(method->effect, method->effect_files, env));
  return {is_pass(reply), reply};
}

}  // namespace htnagent
