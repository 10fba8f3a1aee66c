#pragma once

#include <chrono>
#include <cstdlib>
#include <memory>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "retag/prompts.hpp"
#include "retag/util.hpp"

namespace retag {

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;
};

// One chat-completion call. prompt_name and vars carry the template identity
// and the rendered inputs; the scripted backend is a pure function of them,
// the HTTP backend only looks at messages.
struct CompletionRequest {
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_tokens = 1024;
  std::string model;
  std::string prompt_name;
  VarMap vars;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string complete(const CompletionRequest& request) = 0;
  virtual std::string name() const = 0;
};

struct BackendSettings {
  std::string base_url = "http://localhost:8000/v1";
  std::string model = "llama-3.3-70b-instruct";
  std::string api_key_env = "RETAG_API_KEY";
  int timeout_seconds = 120;
};

// OpenAI-compatible chat-completions client. POSTs to
// {base_url}/chat/completions with a bearer token from the environment.
class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(BackendSettings settings) : settings_(std::move(settings)) {}

  std::string complete(const CompletionRequest& request) override;
  std::string name() const override { return "http"; }

  const BackendSettings& settings() const { return settings_; }

 private:
  BackendSettings settings_;
};

struct RetryPolicy {
  int max_retries = 3;       // attempts = max_retries + 1
  double backoff_ms = 250;   // doubled per retry
};

// Shared entry point for all model calls: renders nothing itself, just
// validates the request and retries transient transport failures.
class Gateway {
 public:
  Gateway(std::shared_ptr<Backend> backend, RetryPolicy retry = {})
      : backend_(std::move(backend)), retry_(retry) {}

  std::string complete(const CompletionRequest& request) const {
    if (request.messages.empty()) throw ContractError("completion request has no messages");
    if (!backend_) throw ConfigError("no completion backend configured");
    int attempts = 0;
    double backoff = retry_.backoff_ms;
    for (;;) {
      ++attempts;
      try {
        return backend_->complete(request);
      } catch (const TransportError& e) {
        if (attempts > retry_.max_retries)
          throw TransportError(std::string(e.what()) + " (after " + std::to_string(attempts) +
                                   " attempts)",
                               attempts);
        std::this_thread::sleep_for(
            std::chrono::duration<double, std::milli>(backoff));
        backoff *= 2;
      }
    }
  }

  // Renders a template and completes it in one step. The rendered prompt is
  // sent as a single user message; vars travel with the request so scripted
  // backends can apply their rules without re-parsing the prompt.
  std::string run(const PromptLibrary& lib, const std::string& template_name, const VarMap& vars,
                  double temperature = 0.0, int max_tokens = 1024,
                  const std::string& model = "") const {
    const PromptTemplate& tpl = lib.get(template_name);
    CompletionRequest req;
    req.messages.push_back({"user", render_template(tpl, vars)});
    req.temperature = temperature;
    req.max_tokens = max_tokens;
    req.model = model;
    req.prompt_name = template_name;
    req.vars = vars;
    return complete(req);
  }

  const Backend& backend() const { return *backend_; }

 private:
  std::shared_ptr<Backend> backend_;
  RetryPolicy retry_;
};

}  // namespace retag

// httplib pulls in a lot; keep it at the bottom and implementation-only.
#include <httplib.h>

namespace retag {

inline std::string HttpBackend::complete(const CompletionRequest& request) {
  nlohmann::json body;
  body["model"] = request.model.empty() ? settings_.model : request.model;
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;
  auto& msgs = body["messages"] = nlohmann::json::array();
  for (const auto& m : request.messages) msgs.push_back({{"role", m.role}, {"content", m.content}});

  // httplib clients take scheme://host:port only; any path component of the
  // base url becomes a request path prefix.
  std::string origin = settings_.base_url;
  std::string prefix;
  if (size_t scheme = origin.find("://"); scheme != std::string::npos) {
    if (size_t slash = origin.find('/', scheme + 3); slash != std::string::npos) {
      prefix = origin.substr(slash);
      origin = origin.substr(0, slash);
    }
  }
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();

  httplib::Client client(origin);
  client.set_connection_timeout(settings_.timeout_seconds, 0);
  client.set_read_timeout(settings_.timeout_seconds, 0);
  httplib::Headers headers;
  if (const char* key = std::getenv(settings_.api_key_env.c_str()); key && *key)
    headers.emplace("Authorization", std::string("Bearer ") + key);

  auto res = client.Post(prefix + "/chat/completions", headers, body.dump(), "application/json");
  if (!res) throw TransportError("chat completion request failed: " + httplib::to_string(res.error()));
  if (res->status == 429 || res->status >= 500)
    throw TransportError("chat completion returned status " + std::to_string(res->status));
  if (res->status < 200 || res->status >= 300)
    throw ParseError("chat completion returned status " + std::to_string(res->status) + ": " +
                     res->body);

  nlohmann::json payload = nlohmann::json::parse(res->body, nullptr, false);
  if (payload.is_discarded() || !payload.contains("choices") || payload["choices"].empty())
    throw ParseError("malformed chat completion response");
  const auto& msg = payload["choices"][0]["message"];
  if (!msg.contains("content")) throw ParseError("chat completion response has no content");
  return msg["content"].get<std::string>();
}

}  // namespace retag
