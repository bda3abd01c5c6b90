#pragma once

// Prompt assembly, agent-response parsing and chat backends.

#include <chrono>
#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "htnagent/environment.hpp"
#include "htnagent/task_network.hpp"

namespace htnagent {

inline constexpr std::size_t kPromptCommandWindow = 10;

/// Slots of the agent prompt template.
struct PromptContext {
  std::string notes;
  std::string last_response;
  std::vector<std::string> last_commands;  // only the final ten are rendered
  std::string last_output;
  std::string current_task;
  std::string current_effect;
};

std::string_view agent_prompt_template();
std::string render_agent_prompt(const PromptContext& ctx);

struct AgentResponse {
  std::string observation;
  std::string thought;
  Action action;

  friend bool operator==(const AgentResponse&, const AgentResponse&) = default;
};

/// Fed back to the agent as the next trace; never aborts an episode.
struct ParseFailure {
  std::string message;
};

using ParseResult = std::variant<AgentResponse, ParseFailure>;

/// Finds the first balanced {...} span that parses as a JSON object, skipping
/// prose and markdown fences around it. Returns the span itself so callers
/// can choose an order-preserving parser.
std::optional<std::string_view> extract_json_object(std::string_view text);

ParseResult parse_agent_response(std::string_view text);

/// Serializes in the example layout: observation, thought, then an action
/// object with name / action_arg1 / action_arg2.
std::string format_agent_response(const AgentResponse& response);

struct CallStats {
  std::size_t calls = 0;
  std::size_t attempts = 0;  // includes retries
  double total_latency_s = 0.0;
};

/// A chat-completion source. complete() is safe to call from several
/// threads when the concrete backend says so (HTTP and function backends
/// are; the scripted backend is episode-local).
class Backend {
 public:
  virtual ~Backend() = default;

  /// Returns the model's text for a single-message prompt and records latency.
  std::string complete(const std::string& prompt);

  CallStats stats() const;
  virtual std::string describe() const = 0;

 protected:
  virtual std::string do_complete(const std::string& prompt) = 0;
  void count_attempt();

 private:
  mutable std::mutex mu_;
  CallStats stats_;
};

/// Replays canned responses in order; throws ScriptedExhausted afterwards.
class ScriptedBackend final : public Backend {
 public:
  explicit ScriptedBackend(std::vector<std::string> responses);
  std::string describe() const override { return "scripted"; }
  std::size_t remaining() const;
  /// Prompts received so far, in order.
  std::vector<std::string> prompts() const;

 protected:
  std::string do_complete(const std::string& prompt) override;

 private:
  mutable std::mutex mu_;
  std::vector<std::string> responses_;
  std::size_t cursor_ = 0;
  std::vector<std::string> prompts_;
};

/// Wraps a callable; useful for policies computed from the prompt.
class FunctionBackend final : public Backend {
 public:
  using Fn = std::function<std::string(const std::string&)>;
  explicit FunctionBackend(Fn fn, std::string name = "function")
      : fn_(std::move(fn)), name_(std::move(name)) {}
  std::string describe() const override { return name_; }

 protected:
  std::string do_complete(const std::string& prompt) override { return fn_(prompt); }

 private:
  Fn fn_;
  std::string name_;
};

/// OpenAI-style chat endpoint. Field names and the response location are
/// configuration so other servers can be targeted without code changes.
struct HttpChatConfig {
  std::string base_url = "http://localhost:11434";
  std::string path = "/v1/chat/completions";
  std::string model;
  std::string auth_header = "Authorization";
  std::string auth_value;  // e.g. "Bearer sk-..."; empty sends no header
  std::string model_field = "model";
  std::string messages_field = "messages";
  std::string role = "user";
  /// JSON pointer into the response body.
  std::string response_pointer = "/choices/0/message/content";
  /// Merged into the request body (temperature, max_tokens, ...).
  nlohmann::json params = nlohmann::json::object();
  int retries = 2;
  double timeout_s = 600.0;
  double retry_backoff_s = 1.0;

  static HttpChatConfig from_json(const nlohmann::json& j);
  /// HTNAGENT_ENDPOINT overrides base_url, HTNAGENT_API_KEY sets a bearer token.
  void apply_env_overrides();
};

class HttpChatBackend final : public Backend {
 public:
  explicit HttpChatBackend(HttpChatConfig cfg) : cfg_(std::move(cfg)) {}
  std::string describe() const override { return "http:" + cfg_.base_url + cfg_.path; }
  const HttpChatConfig& config() const noexcept { return cfg_; }

 protected:
  std::string do_complete(const std::string& prompt) override;

 private:
  HttpChatConfig cfg_;
};

/// {"kind": "http", ...HttpChatConfig fields} or
/// {"kind": "scripted", "responses": [...]} / {"kind": "scripted", "responses_file": path}
std::unique_ptr<Backend> make_backend(const nlohmann::json& cfg);

std::string_view task_network_prompt_template();
std::string render_task_network_prompt(std::string_view problem_spec);

struct NetworkGenerationOptions {
  int retries = 2;
  SubtaskOrder order = SubtaskOrder::Ascending;
  std::string root_task = "process user request";
};

/// Asks the backend for a method library describing how to solve problems
/// of the given specification. Rejects replies that do not parse, are
/// empty, lack the root task, or contain cycles; retries those.
/// Throws NetworkGenerationError after the last attempt.
MethodLibrary generate_task_network(Backend& backend, std::string_view problem_spec,
                                    const NetworkGenerationOptions& opts = {});

}  // namespace htnagent
