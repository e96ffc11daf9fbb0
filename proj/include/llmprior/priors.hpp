#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "llmprior/dataset.hpp"
#include "llmprior/gaussian.hpp"

namespace llmprior {

enum class Informativeness { moderate, weak, custom };

std::string to_string(Informativeness level);
Informativeness informativeness_from_string(const std::string& s);

// Raw hyperparameters; an entry may hold an invalid sd until validated.
struct PriorEntry {
  double mean = 0.0;
  double sd = 1.0;
  std::string justification;

  GaussianDist dist() const { return GaussianDist(mean, sd); }

  friend bool operator==(const PriorEntry&, const PriorEntry&) = default;
};

/// Independent Gaussian priors, one per coefficient, with provenance.
struct PriorSet {
  std::string label;   // e.g. "Claude/moderate"
  std::string source;  // LLM identifier or "manual"
  Informativeness informativeness = Informativeness::custom;
  double confidence_weight = 0.0;  // fraction in [0,1]
  std::map<std::string, PriorEntry> entries;

  const PriorEntry& entry(const std::string& coefficient) const;

  friend bool operator==(const PriorSet&, const PriorSet&) = default;
};

struct PriorCatalog {
  std::string model_spec_id;
  std::vector<PriorSet> sets;

  const PriorSet& find(const std::string& label) const;  // LookupError listing labels
  std::vector<std::string> labels() const;

  friend bool operator==(const PriorCatalog&, const PriorCatalog&) = default;
};

struct ValidationFinding {
  enum class Kind { missing_coefficient, extra_coefficient, invalid_sd, invalid_mean, weight_out_of_range };
  Kind kind;
  std::string coefficient;  // empty for set-level findings
  std::string message;
};

std::string to_string(ValidationFinding::Kind kind);

/// Report-style check of a set against a spec; empty result means valid.
std::vector<ValidationFinding> validate_prior_set(const PriorSet& set, const ModelSpec& spec);

/// Validates every set; throws ValidationError summarising the first bad set.
void require_valid(const PriorCatalog& catalog, const ModelSpec& spec);

/// Normalises percentages (values in (1, 100]) to fractions.
double normalize_weight(double w);

// JSON schema:
// {"model_spec_id": str, "sets": [{"label": str, "source": str,
//   "informativeness": "moderate"|"weak"|"custom", "confidence_weight": number,
//   "entries": {"<coef>": {"mean": number, "sd": number, "justification": str}}}]}
//
// Only structure and types are checked here; values and coverage of a spec
// are validate_prior_set's job. Labels must be unique.
PriorCatalog catalog_from_json(const nlohmann::json& j);
PriorSet prior_set_from_json(const nlohmann::json& j, const std::string& path);
nlohmann::json to_json(const PriorCatalog& catalog);
nlohmann::json to_json(const PriorSet& set);

PriorCatalog load_catalog(const std::filesystem::path& path);
void save_catalog(const PriorCatalog& catalog, const std::filesystem::path& path);

}  // namespace llmprior
