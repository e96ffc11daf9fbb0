#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "llmprior/dataset.hpp"
#include "llmprior/priors.hpp"

namespace llmprior {

enum class Likelihood { logistic, linear };

std::string to_string(Likelihood likelihood);
Likelihood likelihood_for(const ModelSpec& spec);

// Prompt text with {{placeholder}} slots. Known placeholders:
//   expertise, model_kind, outcome, parameter_range, response_description,
//   linear_predictor, predictor_details, knowledge_topic, first_parameter,
//   last_parameter, coefficient_keys, extra_context
struct PromptTemplate {
  std::string persona;
  std::string model_block;
  std::vector<std::string> instruction_blocks;
  std::string output_contract;

  static PromptTemplate standard();
};

PromptTemplate prompt_template_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PromptTemplate& t);
PromptTemplate load_prompt_template(const std::filesystem::path& path);

/// Replaces each {{name}} with values.at(name). Unknown placeholders are an
/// ArgumentError so typos in edited templates surface immediately.
std::string render_template(const std::string& text, const std::vector<std::pair<std::string, std::string>>& values);

/// Deterministic elicitation prompt. `extra_context` is appended verbatim
/// after the model details.
std::string build_prompt(const ModelSpec& spec, Likelihood likelihood, const std::string& extra_context,
                         const PromptTemplate& tmpl = PromptTemplate::standard());

/// "$\eta = \beta_0 + \beta_1 \text{age} + ...$"
std::string linear_predictor_text(const ModelSpec& spec, Likelihood likelihood);

// ---------------------------------------------------------------------------
// Endpoint

// JSON: {provider, base_url, model, temperature, max_tokens, api_key_env}
// plus optional max_attempts, backoff_ms, timeout_s, system_prompt.
// provider is "openai" (also any OpenAI-compatible server), "anthropic" or
// "gemini". base_url includes the API version prefix, e.g.
// "https://api.openai.com/v1".
struct EndpointConfig {
  std::string provider = "openai";
  std::string base_url;
  std::string model;
  double temperature = 0.0;
  int max_tokens = 4096;
  std::string api_key_env;  // empty: send no credentials
  int max_attempts = 3;
  int backoff_ms = 500;  // doubled after each failed attempt
  double timeout_s = 120.0;
  std::string system_prompt;
};

EndpointConfig endpoint_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EndpointConfig& c);
EndpointConfig load_endpoint_config(const std::filesystem::path& path);

struct TokenUsage {
  long long prompt_tokens = 0;
  long long completion_tokens = 0;
};

struct LlmExchange {
  std::string text;           // assistant message content
  std::string request_body;   // JSON sent (no credentials)
  std::string response_body;  // raw body of the final attempt
  int status = 0;
  int attempts = 0;
  std::optional<TokenUsage> usage;
};

/// One chat completion with the prompt as the user message. Retries 429, 5xx
/// and connection failures with exponential backoff; 401/403 fail at once.
/// Throws ConfigError when the key variable is unset and TransportError for
/// every failed exchange.
LlmExchange call_llm(const std::string& prompt, const EndpointConfig& config);

// ---------------------------------------------------------------------------
// Response parsing

/// Uses the first JSON object in the text that has a "sets" array; without
/// one, falls back to N(mean, sd^2) statements grouped under "Suggestion X"
/// or "Set X" headings. Prose sets are labelled "<source>/<key>". Every
/// returned set validates against `spec`; otherwise ParseError keeps `raw`.
std::vector<PriorSet> parse_response(const std::string& raw, const ModelSpec& spec, const std::string& source = "llm");

/// The prose parser on its own; sets are returned whether or not complete.
std::vector<PriorSet> parse_prose_sets(const std::string& raw, const ModelSpec& spec, const std::string& source);

/// Canonical ASCII form of LaTeX/Unicode notation (beta_1, ^2, N(, -).
std::string normalize_notation(const std::string& text);

// ---------------------------------------------------------------------------
// Audit trail

struct ElicitationRecord {
  std::string prompt_text;
  std::string raw_response;
  std::vector<PriorSet> parsed_sets;
  std::string provider;
  std::string model_name;
  std::string timestamp;  // UTC, ISO 8601
  std::optional<TokenUsage> token_usage;
  std::string request_body;
  int attempts = 0;
  bool parse_failed = false;
  std::string error;  // empty on success
};

nlohmann::json to_json(const ElicitationRecord& r);
std::string utc_timestamp();

/// Appends one JSON line with a single write(2) on an O_APPEND descriptor.
void append_audit_record(const std::filesystem::path& path, const ElicitationRecord& record);

struct ElicitOptions {
  std::string extra_context;
  PromptTemplate prompt_template = PromptTemplate::standard();
  std::filesystem::path audit_path;  // empty: no audit file
};

/// build_prompt + call_llm + parse_response. The audit record is written on
/// success and on failure; failures rethrow afterwards.
ElicitationRecord elicit(const ModelSpec& spec, const EndpointConfig& endpoint, const ElicitOptions& options);

}  // namespace llmprior
