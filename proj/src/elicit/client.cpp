#include <chrono>
#include <cstdlib>
#include <regex>
#include <thread>

#include <fmt/format.h>

#include "json_fields.hpp"
#include "llmprior/elicit.hpp"
#include "llmprior/errors.hpp"

// After Eigen: <resolv.h> defines a _res macro that breaks Eigen headers.
#include <httplib.h>

namespace llmprior {

using nlohmann::json;

EndpointConfig endpoint_config_from_json(const json& j) {
  using namespace detail;
  EndpointConfig c;
  c.provider = require_string(j, "provider", "");
  c.base_url = require_string(j, "base_url", "");
  c.model = require_string(j, "model", "");
  c.temperature = require_number(j, "temperature", "");
  c.max_tokens = static_cast<int>(require_number(j, "max_tokens", ""));
  c.api_key_env = require_string(j, "api_key_env", "");
  if (j.contains("max_attempts")) c.max_attempts = static_cast<int>(require_number(j, "max_attempts", ""));
  if (j.contains("backoff_ms")) c.backoff_ms = static_cast<int>(require_number(j, "backoff_ms", ""));
  if (j.contains("timeout_s")) c.timeout_s = require_number(j, "timeout_s", "");
  c.system_prompt = optional_string(j, "system_prompt", "");

  if (c.provider != "openai" && c.provider != "anthropic" && c.provider != "gemini")
    throw SchemaError("provider", "provider must be openai|anthropic|gemini, got \"" + c.provider + "\"");
  if (c.max_attempts < 1) throw SchemaError("max_attempts", "max_attempts must be >= 1");
  if (c.max_tokens < 1) throw SchemaError("max_tokens", "max_tokens must be >= 1");
  if (c.backoff_ms < 0) throw SchemaError("backoff_ms", "backoff_ms must be >= 0");
  if (!(c.timeout_s > 0.0)) throw SchemaError("timeout_s", "timeout_s must be > 0");
  return c;
}

json to_json(const EndpointConfig& c) {
  return {{"provider", c.provider},         {"base_url", c.base_url},       {"model", c.model},
          {"temperature", c.temperature},   {"max_tokens", c.max_tokens},   {"api_key_env", c.api_key_env},
          {"max_attempts", c.max_attempts}, {"backoff_ms", c.backoff_ms},   {"timeout_s", c.timeout_s},
          {"system_prompt", c.system_prompt}};
}

EndpointConfig load_endpoint_config(const std::filesystem::path& path) {
  return endpoint_config_from_json(detail::parse_json_text(detail::read_text_file(path), path.string()));
}

namespace {

struct Request {
  std::string path;
  httplib::Headers headers;
  json body;
};

Request make_request(const std::string& prompt, const EndpointConfig& c, const std::string& prefix,
                     const std::string& key) {
  Request r;
  if (c.provider == "anthropic") {
    r.path = prefix + "/messages";
    r.body = {{"model", c.model},
              {"max_tokens", c.max_tokens},
              {"temperature", c.temperature},
              {"messages", json::array({{{"role", "user"}, {"content", prompt}}})}};
    if (!c.system_prompt.empty()) r.body["system"] = c.system_prompt;
    r.headers.emplace("anthropic-version", "2023-06-01");
    if (!key.empty()) r.headers.emplace("x-api-key", key);
  } else if (c.provider == "gemini") {
    r.path = prefix + "/models/" + c.model + ":generateContent";
    r.body = {{"contents", json::array({{{"role", "user"}, {"parts", json::array({{{"text", prompt}}})}}})},
              {"generationConfig", {{"temperature", c.temperature}, {"maxOutputTokens", c.max_tokens}}}};
    if (!c.system_prompt.empty())
      r.body["systemInstruction"] = {{"parts", json::array({{{"text", c.system_prompt}}})}};
    if (!key.empty()) r.headers.emplace("x-goog-api-key", key);
  } else {
    r.path = prefix + "/chat/completions";
    json messages = json::array();
    if (!c.system_prompt.empty()) messages.push_back({{"role", "system"}, {"content", c.system_prompt}});
    messages.push_back({{"role", "user"}, {"content", prompt}});
    r.body = {{"model", c.model}, {"temperature", c.temperature}, {"max_tokens", c.max_tokens}, {"messages", messages}};
    if (!key.empty()) r.headers.emplace("Authorization", "Bearer " + key);
  }
  return r;
}

// Pulls the assistant text and token counts out of a provider response.
void read_reply(const json& j, const std::string& provider, LlmExchange& out) {
  auto count = [](const json& obj, const char* key) -> long long {
    auto it = obj.find(key);
    return it != obj.end() && it->is_number() ? it->get<long long>() : 0;
  };
  if (provider == "anthropic") {
    for (const auto& block : j.at("content"))
      if (block.value("type", "") == "text") out.text += block.at("text").get<std::string>();
    if (j.contains("usage")) out.usage = TokenUsage{count(j["usage"], "input_tokens"), count(j["usage"], "output_tokens")};
  } else if (provider == "gemini") {
    for (const auto& part : j.at("candidates").at(0).at("content").at("parts"))
      if (part.contains("text")) out.text += part.at("text").get<std::string>();
    if (j.contains("usageMetadata"))
      out.usage = TokenUsage{count(j["usageMetadata"], "promptTokenCount"),
                             count(j["usageMetadata"], "candidatesTokenCount")};
  } else {
    const json& content = j.at("choices").at(0).at("message").at("content");
    if (content.is_string()) out.text = content.get<std::string>();
    if (j.contains("usage"))
      out.usage = TokenUsage{count(j["usage"], "prompt_tokens"), count(j["usage"], "completion_tokens")};
  }
}

bool transient(int status) { return status == 429 || status >= 500; }

}  // namespace

LlmExchange call_llm(const std::string& prompt, const EndpointConfig& config) {
  std::string key;
  if (!config.api_key_env.empty()) {
    const char* v = std::getenv(config.api_key_env.c_str());
    if (v == nullptr || *v == '\0')
      throw ConfigError("API key environment variable " + config.api_key_env + " is not set");
    key = v;
  }

  static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(config.base_url, m, url_re)) throw ConfigError("invalid base_url '" + config.base_url + "'");
  std::string prefix = m[2].str();
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();

  const Request req = make_request(prompt, config, prefix, key);
  LlmExchange out;
  out.request_body = req.body.dump();

  httplib::Client client(m[1].str());
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::duration<double>(config.timeout_s));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  TransportFailure last_kind = TransportFailure::connection;
  std::string last_what;
  int delay = config.backoff_ms;
  for (int attempt = 1; attempt <= config.max_attempts; ++attempt) {
    out.attempts = attempt;
    const auto started = std::chrono::steady_clock::now();
    auto res = client.Post(req.path, req.headers, out.request_body, "application/json");
    if (!res) {
      const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      const auto err = res.error();
      const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                             (err == httplib::Error::Read && elapsed >= 0.9 * config.timeout_s);
      last_kind = timed_out ? TransportFailure::timeout : TransportFailure::connection;
      last_what = fmt::format("{} request to {} failed: {}", config.provider, config.base_url, httplib::to_string(err));
      out.status = 0;
      out.response_body.clear();
    } else {
      out.status = res->status;
      out.response_body = res->body;
      if (res->status == 401 || res->status == 403)
        throw TransportError(TransportFailure::auth, res->status, attempt, res->body,
                             fmt::format("{} rejected the credentials (HTTP {})", config.provider, res->status));
      if (res->status >= 200 && res->status < 300) {
        if (res->body.empty())
          throw TransportError(TransportFailure::empty_response, res->status, attempt, {},
                               fmt::format("{} returned an empty body", config.provider));
        try {
          read_reply(json::parse(res->body), config.provider, out);
        } catch (const json::exception& e) {
          throw TransportError(TransportFailure::status, res->status, attempt, res->body,
                               fmt::format("{} response has an unexpected shape: {}", config.provider, e.what()));
        }
        if (out.text.empty())
          throw TransportError(TransportFailure::empty_response, res->status, attempt, res->body,
                               fmt::format("{} returned no message text", config.provider));
        return out;
      }
      last_kind = TransportFailure::status;
      last_what = fmt::format("{} returned HTTP {}", config.provider, res->status);
      if (!transient(res->status)) throw TransportError(last_kind, res->status, attempt, res->body, last_what);
    }
    if (attempt < config.max_attempts) {
      std::this_thread::sleep_for(std::chrono::milliseconds(delay));
      delay *= 2;
    }
  }
  throw TransportError(last_kind, out.status, out.attempts, out.response_body,
                       last_what + fmt::format(" (after {} attempts)", out.attempts));
}

}  // namespace llmprior
