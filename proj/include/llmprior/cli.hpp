#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "llmprior/elicit.hpp"

namespace llmprior {

struct RunConfig {
  std::filesystem::path dataset_path;
  std::filesystem::path spec_path;
  std::optional<std::filesystem::path> catalog_path;
  std::optional<std::filesystem::path> endpoint_config_path;
  std::optional<std::filesystem::path> prompt_template_path;
  std::string extra_context;
  std::uint64_t seed = 1;
  int folds = 5;
  std::filesystem::path output_dir = "out";
  int bootstrap_reps = 0;  // 0: Fisher sds only
  int mc_draws = 1000;

  /// folds >= 2, counts positive, output_dir creatable.
  void validate() const;
};

// Each command writes its artifacts under output_dir and returns the text it
// would print (tables, paths). Errors propagate as llmprior::Error.
std::string cmd_prompt(const RunConfig& config);
std::string cmd_elicit(const RunConfig& config);
std::string cmd_evaluate(const RunConfig& config);
std::string cmd_cv(const RunConfig& config);
std::string cmd_posterior(const RunConfig& config, const std::string& prior_label);

/// Label made safe for a file name ("Claude/moderate" -> "Claude_moderate").
std::string file_stem(const std::string& label);

}  // namespace llmprior
