#include "llmprior/priors.hpp"

#include <cmath>
#include <set>

#include "json_fields.hpp"
#include "llmprior/errors.hpp"

namespace llmprior {

using nlohmann::json;

std::string to_string(Informativeness level) {
  switch (level) {
    case Informativeness::moderate:
      return "moderate";
    case Informativeness::weak:
      return "weak";
    case Informativeness::custom:
      return "custom";
  }
  return "custom";
}

Informativeness informativeness_from_string(const std::string& s) {
  if (s == "moderate") return Informativeness::moderate;
  if (s == "weak") return Informativeness::weak;
  if (s == "custom") return Informativeness::custom;
  throw SchemaError("informativeness", "informativeness must be moderate|weak|custom, got \"" + s + "\"");
}

std::string to_string(ValidationFinding::Kind kind) {
  switch (kind) {
    case ValidationFinding::Kind::missing_coefficient:
      return "missing_coefficient";
    case ValidationFinding::Kind::extra_coefficient:
      return "extra_coefficient";
    case ValidationFinding::Kind::invalid_sd:
      return "invalid_sd";
    case ValidationFinding::Kind::invalid_mean:
      return "invalid_mean";
    case ValidationFinding::Kind::weight_out_of_range:
      return "weight_out_of_range";
  }
  return "unknown";
}

const PriorEntry& PriorSet::entry(const std::string& coefficient) const {
  auto it = entries.find(coefficient);
  if (it == entries.end()) throw LookupError("prior set '" + label + "' has no entry for '" + coefficient + "'", {});
  return it->second;
}

const PriorSet& PriorCatalog::find(const std::string& label) const {
  for (const auto& s : sets)
    if (s.label == label) return s;
  std::string list;
  for (const auto& l : labels()) list += (list.empty() ? "" : ", ") + l;
  throw LookupError("unknown prior label '" + label + "'; available: " + list, labels());
}

std::vector<std::string> PriorCatalog::labels() const {
  std::vector<std::string> out;
  for (const auto& s : sets) out.push_back(s.label);
  return out;
}

std::vector<ValidationFinding> validate_prior_set(const PriorSet& set, const ModelSpec& spec) {
  using Kind = ValidationFinding::Kind;
  std::vector<ValidationFinding> report;
  const auto names = spec.coefficient_names();
  for (const auto& name : names)
    if (!set.entries.contains(name))
      report.push_back({Kind::missing_coefficient, name, "missing prior for coefficient '" + name + "'"});
  const std::set<std::string> known(names.begin(), names.end());
  for (const auto& [name, e] : set.entries) {
    if (!known.contains(name))
      report.push_back({Kind::extra_coefficient, name, "prior for unknown coefficient '" + name + "'"});
    if (!std::isfinite(e.mean))
      report.push_back({Kind::invalid_mean, name, "non-finite mean for '" + name + "'"});
    if (!std::isfinite(e.sd) || !(e.sd > 0.0))
      report.push_back({Kind::invalid_sd, name, "sd for '" + name + "' must be finite and > 0"});
  }
  if (!(set.confidence_weight >= 0.0 && set.confidence_weight <= 1.0))
    report.push_back({Kind::weight_out_of_range, {}, "confidence_weight must lie in [0,1]"});
  return report;
}

void require_valid(const PriorCatalog& catalog, const ModelSpec& spec) {
  for (const auto& set : catalog.sets) {
    const auto report = validate_prior_set(set, spec);
    if (!report.empty()) {
      std::string msg = "prior set '" + set.label + "' is invalid for model '" + spec.id + "':";
      for (const auto& f : report) msg += " " + f.message + ";";
      throw ValidationError(msg);
    }
  }
}

double normalize_weight(double w) { return (w > 1.0 && w <= 100.0) ? w / 100.0 : w; }

PriorSet prior_set_from_json(const json& j, const std::string& path) {
  using namespace detail;
  PriorSet set;
  set.label = require_string(j, "label", path);
  set.source = require_string(j, "source", path);
  set.informativeness = informativeness_from_string(require_string(j, "informativeness", path));
  set.confidence_weight = normalize_weight(require_number(j, "confidence_weight", path));
  const json& entries = require(j, "entries", path);
  const std::string epath = join_path(path, "entries");
  if (!entries.is_object()) throw SchemaError(epath, "field '" + epath + "' must be an object");
  for (const auto& [name, e] : entries.items()) {
    const std::string cpath = join_path(epath, name);
    PriorEntry entry;
    entry.mean = require_number(e, "mean", cpath);
    entry.sd = require_number(e, "sd", cpath);
    entry.justification = optional_string(e, "justification", cpath);
    set.entries.emplace(name, std::move(entry));
  }
  return set;
}

PriorCatalog catalog_from_json(const json& j) {
  using namespace detail;
  PriorCatalog catalog;
  catalog.model_spec_id = optional_string(j, "model_spec_id", "");
  const json& sets = require(j, "sets", "");
  if (!sets.is_array()) throw SchemaError("sets", "field 'sets' must be an array");
  std::set<std::string> labels;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    PriorSet set = prior_set_from_json(sets[i], "sets[" + std::to_string(i) + "]");
    if (!labels.insert(set.label).second)
      throw ValidationError("duplicate prior set label '" + set.label + "' in catalog");
    catalog.sets.push_back(std::move(set));
  }
  return catalog;
}

json to_json(const PriorSet& set) {
  json entries = json::object();
  for (const auto& [name, e] : set.entries)
    entries[name] = {{"mean", e.mean}, {"sd", e.sd}, {"justification", e.justification}};
  return {{"label", set.label},
          {"source", set.source},
          {"informativeness", to_string(set.informativeness)},
          {"confidence_weight", set.confidence_weight},
          {"entries", entries}};
}

json to_json(const PriorCatalog& catalog) {
  json sets = json::array();
  for (const auto& s : catalog.sets) sets.push_back(to_json(s));
  return {{"model_spec_id", catalog.model_spec_id}, {"sets", sets}};
}

PriorCatalog load_catalog(const std::filesystem::path& path) {
  const std::string text = detail::read_text_file(path);
  return catalog_from_json(detail::parse_json_text(text, path.string()));
}

void save_catalog(const PriorCatalog& catalog, const std::filesystem::path& path) {
  // nlohmann writes the shortest decimal that round-trips each double exactly.
  detail::write_text_file(path, to_json(catalog).dump(2) + "\n");
}

}  // namespace llmprior
