#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>

#include <fmt/format.h>

#include "llmprior/elicit.hpp"
#include "llmprior/errors.hpp"

namespace llmprior {

using nlohmann::json;

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  return fmt::format("{}.{:03d}Z", buf, static_cast<int>(ms));
}

json to_json(const ElicitationRecord& r) {
  json sets = json::array();
  for (const auto& s : r.parsed_sets) sets.push_back(to_json(s));
  json usage = nullptr;
  if (r.token_usage)
    usage = {{"prompt_tokens", r.token_usage->prompt_tokens}, {"completion_tokens", r.token_usage->completion_tokens}};
  return {{"timestamp", r.timestamp},       {"provider", r.provider},   {"model_name", r.model_name},
          {"prompt_text", r.prompt_text},   {"request_body", r.request_body},
          {"raw_response", r.raw_response}, {"parsed_sets", sets},      {"token_usage", usage},
          {"attempts", r.attempts},         {"parse_failed", r.parse_failed}, {"error", r.error}};
}

void append_audit_record(const std::filesystem::path& path, const ElicitationRecord& record) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  // Invalid UTF-8 in a raw response must not lose the record.
  const std::string line = to_json(record).dump(-1, ' ', false, json::error_handler_t::replace) + "\n";
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) throw IoError(fmt::format("cannot open audit log '{}': {}", path.string(), std::strerror(errno)));
  const ssize_t n = ::write(fd, line.data(), line.size());
  const int err = errno;
  ::close(fd);
  if (n != static_cast<ssize_t>(line.size()))
    throw IoError(fmt::format("short write to audit log '{}': {}", path.string(), std::strerror(err)));
}

ElicitationRecord elicit(const ModelSpec& spec, const EndpointConfig& endpoint, const ElicitOptions& options) {
  ElicitationRecord rec;
  rec.provider = endpoint.provider;
  rec.model_name = endpoint.model;
  rec.prompt_text = build_prompt(spec, likelihood_for(spec), options.extra_context, options.prompt_template);
  rec.timestamp = utc_timestamp();

  auto log = [&] {
    if (!options.audit_path.empty()) append_audit_record(options.audit_path, rec);
  };

  try {
    const LlmExchange ex = call_llm(rec.prompt_text, endpoint);
    rec.raw_response = ex.text;
    rec.request_body = ex.request_body;
    rec.attempts = ex.attempts;
    rec.token_usage = ex.usage;
  } catch (const TransportError& e) {
    rec.raw_response = e.body();
    rec.attempts = e.attempts();
    rec.error = e.what();
    log();
    throw;
  }

  try {
    rec.parsed_sets = parse_response(rec.raw_response, spec, endpoint.model.empty() ? endpoint.provider : endpoint.model);
  } catch (const ParseError& e) {
    rec.parse_failed = true;
    rec.error = e.what();
    log();
    throw;
  }
  log();
  return rec;
}

}  // namespace llmprior
