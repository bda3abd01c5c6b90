#include "htnagent/llm_gateway.hpp"

#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "htnagent/errors.hpp"
#include "htnagent/resources.hpp"
#include "htnagent/text.hpp"

namespace htnagent {

using nlohmann::json;

std::string_view agent_prompt_template() { return resources::get("prompts/agent_prompt.txt"); }

std::string render_agent_prompt(const PromptContext& ctx) {
  const auto& cmds = ctx.last_commands;
  const std::size_t first = cmds.size() > kPromptCommandWindow ? cmds.size() - kPromptCommandWindow : 0;
  std::vector<std::string> window(cmds.begin() + static_cast<std::ptrdiff_t>(first), cmds.end());
  return text::format_positional(agent_prompt_template(),
                                 {ctx.notes, ctx.last_response, text::join(window, "\n"),
                                  ctx.last_output, ctx.current_task, ctx.current_effect});
}

std::optional<std::string_view> extract_json_object(std::string_view s) {
  for (std::size_t start = s.find('{'); start != std::string_view::npos;
       start = s.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    std::size_t end = std::string_view::npos;
    for (std::size_t i = start; i < s.size(); ++i) {
      const char c = s[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        if (--depth == 0) {
          end = i;
          break;
        }
      }
    }
    if (end == std::string_view::npos) continue;
    const auto span = s.substr(start, end - start + 1);
    json j = json::parse(span, nullptr, /*allow_exceptions=*/false);
    if (!j.is_discarded() && j.is_object()) return span;
  }
  return std::nullopt;
}

namespace {

std::string as_text(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (it->is_string()) return it->get<std::string>();
  return it->dump(2);
}

ParseFailure decode_error(const std::string& detail) {
  return ParseFailure{"JSONDecode error: " + detail};
}

}  // namespace

ParseResult parse_agent_response(std::string_view text) {
  auto span = extract_json_object(text);
  if (!span) return decode_error("no valid JSON object found in the response");
  const json doc = json::parse(*span);
  auto act = doc.find("action");
  if (act == doc.end() || !act->is_object()) {
    return decode_error("the response has no \"action\" object");
  }
  auto name = act->find("name");
  if (name == act->end() || !name->is_string()) {
    return decode_error("the action has no \"name\" string");
  }
  auto kind = parse_action_kind(name->get<std::string>());
  if (!kind) {
    return decode_error("unknown action name \"" + name->get<std::string>() +
                        "\"; use read, write, append, or verify");
  }

  AgentResponse r;
  r.observation = as_text(doc, "observation");
  r.thought = as_text(doc, "thought");
  r.action.kind = *kind;
  r.action.arg1 = std::string(text::trim(as_text(*act, "action_arg1")));
  r.action.arg2 = as_text(*act, "action_arg2");
  if (r.action.kind == ActionKind::Read) r.action.arg2.clear();
  if (r.action.kind == ActionKind::Verify) {
    r.action.arg1.clear();
    r.action.arg2.clear();
  }
  return r;
}

std::string format_agent_response(const AgentResponse& response) {
  nlohmann::ordered_json j;
  j["observation"] = response.observation;
  j["thought"] = response.thought;
  j["action"]["name"] = std::string(action_name(response.action.kind));
  j["action"]["action_arg1"] = response.action.arg1;
  j["action"]["action_arg2"] = response.action.arg2;
  return j.dump(2);
}

std::string Backend::complete(const std::string& prompt) {
  const auto t0 = std::chrono::steady_clock::now();
  std::string out = do_complete(prompt);
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::lock_guard lock(mu_);
  ++stats_.calls;
  stats_.total_latency_s += dt;
  return out;
}

CallStats Backend::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

void Backend::count_attempt() {
  std::lock_guard lock(mu_);
  ++stats_.attempts;
}

ScriptedBackend::ScriptedBackend(std::vector<std::string> responses)
    : responses_(std::move(responses)) {}

std::string ScriptedBackend::do_complete(const std::string& prompt) {
  count_attempt();
  std::lock_guard lock(mu_);
  prompts_.push_back(prompt);
  if (cursor_ >= responses_.size()) {
    throw ScriptedExhausted("scripted backend exhausted after " +
                            std::to_string(responses_.size()) + " responses");
  }
  return responses_[cursor_++];
}

std::size_t ScriptedBackend::remaining() const {
  std::lock_guard lock(mu_);
  return responses_.size() - cursor_;
}

std::vector<std::string> ScriptedBackend::prompts() const {
  std::lock_guard lock(mu_);
  return prompts_;
}

HttpChatConfig HttpChatConfig::from_json(const json& j) {
  HttpChatConfig c;
  auto str = [&](const char* key, std::string& into) {
    if (auto it = j.find(key); it != j.end() && it->is_string()) into = it->get<std::string>();
  };
  str("base_url", c.base_url);
  str("path", c.path);
  str("model", c.model);
  str("auth_header", c.auth_header);
  str("auth_value", c.auth_value);
  str("model_field", c.model_field);
  str("messages_field", c.messages_field);
  str("role", c.role);
  str("response_pointer", c.response_pointer);
  if (auto it = j.find("params"); it != j.end() && it->is_object()) c.params = *it;
  if (auto it = j.find("retries"); it != j.end()) c.retries = it->get<int>();
  if (auto it = j.find("timeout_s"); it != j.end()) c.timeout_s = it->get<double>();
  if (auto it = j.find("retry_backoff_s"); it != j.end()) c.retry_backoff_s = it->get<double>();
  if (c.retries < 0) throw ConfigError("retries must be non-negative");
  return c;
}

void HttpChatConfig::apply_env_overrides() {
  if (const char* e = std::getenv("HTNAGENT_ENDPOINT"); e && *e) base_url = e;
  if (const char* k = std::getenv("HTNAGENT_API_KEY"); k && *k) {
    auth_value = std::string("Bearer ") + k;
  }
}

std::string HttpChatBackend::do_complete(const std::string& prompt) {
  json body = cfg_.params.is_object() ? cfg_.params : json::object();
  if (!cfg_.model.empty()) body[cfg_.model_field] = cfg_.model;
  body[cfg_.messages_field] = json::array({{{"role", cfg_.role}, {"content", prompt}}});
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (!cfg_.auth_value.empty()) headers.emplace(cfg_.auth_header, cfg_.auth_value);

  std::string last_error;
  for (int attempt = 0; attempt <= cfg_.retries; ++attempt) {
    if (attempt > 0 && cfg_.retry_backoff_s > 0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(cfg_.retry_backoff_s * attempt));
    }
    count_attempt();
    httplib::Client client(cfg_.base_url);
    const auto secs = static_cast<time_t>(cfg_.timeout_s);
    client.set_connection_timeout(std::min<time_t>(secs, 10), 0);
    client.set_read_timeout(secs, 0);
    client.set_write_timeout(secs, 0);
    auto res = client.Post(cfg_.path, headers, payload, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      last_error = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200);
      continue;
    }
    json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded()) {
      last_error = "response body is not JSON";
      continue;
    }
    const json::json_pointer ptr(cfg_.response_pointer);
    if (!reply.contains(ptr) || !reply.at(ptr).is_string()) {
      last_error = "response has no string at " + cfg_.response_pointer;
      continue;
    }
    return reply.at(ptr).get<std::string>();
  }
  throw TransportError("chat backend " + describe() + " failed after " +
                       std::to_string(cfg_.retries + 1) + " attempts: " + last_error);
}

std::unique_ptr<Backend> make_backend(const json& cfg) {
  const std::string kind = cfg.value("kind", std::string("http"));
  if (kind == "http") {
    auto c = HttpChatConfig::from_json(cfg);
    c.apply_env_overrides();
    return std::make_unique<HttpChatBackend>(std::move(c));
  }
  if (kind == "scripted") {
    std::vector<std::string> responses;
    if (auto it = cfg.find("responses"); it != cfg.end()) {
      responses = it->get<std::vector<std::string>>();
    } else if (auto f = cfg.find("responses_file"); f != cfg.end()) {
      json doc = json::parse(text::read_file(f->get<std::string>()));
      responses = doc.get<std::vector<std::string>>();
    }
    return std::make_unique<ScriptedBackend>(std::move(responses));
  }
  throw ConfigError("unknown backend kind: " + kind);
}

std::string_view task_network_prompt_template() {
  return resources::get("prompts/task_network_prompt.txt");
}

std::string render_task_network_prompt(std::string_view problem_spec) {
  // The template's JSON examples use bare braces, so only the one "{}" slot
  // is substituted.
  std::string out(task_network_prompt_template());
  const auto slot = out.rfind("{}");
  if (slot != std::string::npos) out.replace(slot, 2, problem_spec);
  return out;
}

MethodLibrary generate_task_network(Backend& backend, std::string_view problem_spec,
                                    const NetworkGenerationOptions& opts) {
  const std::string prompt = render_task_network_prompt(problem_spec);
  const TaskName root(opts.root_task);
  std::string reason;
  for (int attempt = 0; attempt <= opts.retries; ++attempt) {
    const std::string reply = backend.complete(prompt);
    auto span = extract_json_object(reply);
    if (!span) {
      reason = "no JSON object in reply";
      continue;
    }
    try {
      MethodLibrary lib = load_method_library(*span, opts.order);
      if (lib.empty()) {
        reason = "network has no methods";
        continue;
      }
      if (!lib.first_relevant(root)) {
        reason = "network has no method for \"" + opts.root_task + "\"";
        continue;
      }
      auto report = validate_library(lib);
      if (report.has_errors()) {
        reason = text::join(report.messages(), "; ");
        continue;
      }
      return lib;
    } catch (const LibraryFormatError& e) {
      reason = e.what();
    }
  }
  throw NetworkGenerationError("unparseable network after " + std::to_string(opts.retries + 1) +
                               " attempts: " + reason);
}

}  // namespace htnagent
