#include "llmprior/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <string_view>
#include <unordered_map>

#include "json_fields.hpp"
#include "llmprior/errors.hpp"

namespace llmprior {

using nlohmann::json;

std::string to_string(ResponseKind kind) { return kind == ResponseKind::binary ? "binary" : "continuous"; }

ResponseKind response_kind_from_string(const std::string& s) {
  if (s == "binary") return ResponseKind::binary;
  if (s == "continuous") return ResponseKind::continuous;
  throw SchemaError("response_kind", "response_kind must be \"binary\" or \"continuous\", got \"" + s + "\"");
}

// ---------------------------------------------------------------------------
// ModelSpec

std::vector<std::string> ModelSpec::coefficient_names() const {
  std::vector<std::string> names;
  names.reserve(coefficient_count());
  if (intercept) names.emplace_back(intercept_name);
  for (const auto& p : predictors) names.push_back(p.name);
  return names;
}

std::optional<std::size_t> ModelSpec::coefficient_index(const std::string& name) const {
  const auto names = coefficient_names();
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names.begin());
}

void ModelSpec::validate() const {
  if (response_name.empty()) throw ArgumentError("model spec: response name is empty");
  std::set<std::string> seen;
  for (const auto& p : predictors) {
    if (p.name.empty()) throw ArgumentError("model spec: predictor with empty name");
    if (intercept && p.name == intercept_name)
      throw ArgumentError("model spec: predictor name 'intercept' is reserved when intercept=true");
    if (!seen.insert(p.name).second) throw ArgumentError("model spec: duplicate predictor '" + p.name + "'");
  }
}

ModelSpec model_spec_from_json(const json& j) {
  using namespace detail;
  ModelSpec spec;
  spec.id = optional_string(j, "id", "");
  spec.response_name = require_string(j, "response_name", "");
  spec.response_kind = response_kind_from_string(require_string(j, "response_kind", ""));
  spec.intercept = j.contains("intercept") ? require_bool(j, "intercept", "") : true;
  if (j.contains("binarize_above") && !j.at("binarize_above").is_null())
    spec.binarize_above = require_number(j, "binarize_above", "");
  const json& preds = require(j, "predictors", "");
  if (!preds.is_array()) throw SchemaError("predictors", "field 'predictors' must be an array");
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const std::string path = "predictors[" + std::to_string(i) + "]";
    Predictor p;
    p.name = require_string(preds[i], "name", path);
    p.description = optional_string(preds[i], "description", path);
    p.unit = optional_string(preds[i], "unit", path);
    spec.predictors.push_back(std::move(p));
  }
  if (j.contains("prompt")) {
    const json& pr = j.at("prompt");
    spec.prompt.expertise = optional_string(pr, "expertise", "prompt");
    spec.prompt.outcome = optional_string(pr, "outcome", "prompt");
    spec.prompt.response_description = optional_string(pr, "response_description", "prompt");
    spec.prompt.knowledge_topic = optional_string(pr, "knowledge_topic", "prompt");
    spec.prompt.extra_context = optional_string(pr, "extra_context", "prompt");
  }
  spec.validate();
  return spec;
}

json to_json(const ModelSpec& spec) {
  json preds = json::array();
  for (const auto& p : spec.predictors)
    preds.push_back({{"name", p.name}, {"description", p.description}, {"unit", p.unit}});
  json j = {
      {"id", spec.id},
      {"response_name", spec.response_name},
      {"response_kind", to_string(spec.response_kind)},
      {"intercept", spec.intercept},
      {"predictors", preds},
      {"prompt",
       {{"expertise", spec.prompt.expertise},
        {"outcome", spec.prompt.outcome},
        {"response_description", spec.prompt.response_description},
        {"knowledge_topic", spec.prompt.knowledge_topic},
        {"extra_context", spec.prompt.extra_context}}},
  };
  if (spec.binarize_above) j["binarize_above"] = *spec.binarize_above;
  return j;
}

ModelSpec load_model_spec(const std::filesystem::path& path) {
  const std::string text = detail::read_text_file(path);
  return model_spec_from_json(detail::parse_json_text(text, path.string()));
}

// ---------------------------------------------------------------------------
// BoundDataset

BoundDataset::BoundDataset(ModelSpec spec, DesignMatrix design, Eigen::VectorXd response, std::size_t dropped)
    : spec_(std::move(spec)), design_(std::move(design)), response_(std::move(response)), dropped_(dropped) {
  if (design_.rows() != response_.size()) throw ArgumentError("design/response row count mismatch");
  if (static_cast<std::size_t>(design_.cols()) != spec_.coefficient_count())
    throw ArgumentError("design column count does not match the model spec");
  if (spec_.response_kind == ResponseKind::binary) {
    for (Eigen::Index i = 0; i < response_.size(); ++i) {
      const double y = response_[i];
      if (y != 0.0 && y != 1.0)
        throw DomainError("binary response '" + spec_.response_name + "' has value " + std::to_string(y) +
                          " outside {0,1} at row " + std::to_string(i));
    }
  }
}

BoundDataset BoundDataset::subset(const std::vector<std::size_t>& rows) const {
  DesignMatrix x(static_cast<Eigen::Index>(rows.size()), design_.cols());
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(rows[i]);
    x.row(static_cast<Eigen::Index>(i)) = design_.row(r);
    y[static_cast<Eigen::Index>(i)] = response_[r];
  }
  return BoundDataset(spec_, std::move(x), std::move(y), 0);
}

BoundDataset make_dataset(const ModelSpec& spec, const Eigen::MatrixXd& predictors, const Eigen::VectorXd& response) {
  spec.validate();
  if (static_cast<std::size_t>(predictors.cols()) != spec.predictors.size())
    throw ArgumentError("predictor matrix has " + std::to_string(predictors.cols()) + " columns, spec has " +
                        std::to_string(spec.predictors.size()));
  const Eigen::Index off = spec.intercept ? 1 : 0;
  DesignMatrix x(predictors.rows(), predictors.cols() + off);
  if (spec.intercept) x.col(0).setOnes();
  x.rightCols(predictors.cols()) = predictors;
  return BoundDataset(spec, std::move(x), response, 0);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  cells.emplace_back(trim(cur));
  return cells;
}

std::optional<double> parse_cell(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = s.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

BoundDataset parse_csv(const std::string& text, const ModelSpec& spec) {
  spec.validate();
  std::string_view rest(text);
  if (rest.starts_with("\xEF\xBB\xBF")) rest.remove_prefix(3);

  auto next_line = [&rest]() -> std::optional<std::string_view> {
    if (rest.empty()) return std::nullopt;
    const auto nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    return line;
  };

  std::optional<std::string_view> header_line;
  while ((header_line = next_line()) && trim(*header_line).empty()) {
  }
  if (!header_line) throw EmptyDataError("CSV has no header row");
  const auto header = split_csv_line(*header_line);
  std::unordered_map<std::string, std::size_t> col_of;
  for (std::size_t i = 0; i < header.size(); ++i) col_of.emplace(header[i], i);

  auto column = [&](const std::string& name) {
    auto it = col_of.find(name);
    if (it == col_of.end()) throw SchemaError(name, "CSV is missing column '" + name + "'");
    return it->second;
  };
  const std::size_t y_col = column(spec.response_name);
  std::vector<std::size_t> x_cols;
  for (const auto& p : spec.predictors) x_cols.push_back(column(p.name));

  const std::size_t p = spec.predictors.size();
  std::vector<double> xs;
  std::vector<double> ys;
  std::size_t dropped = 0;
  while (auto line = next_line()) {
    if (trim(*line).empty()) continue;
    const auto cells = split_csv_line(*line);
    auto cell = [&](std::size_t c) -> std::optional<double> {
      if (c >= cells.size()) return std::nullopt;
      return parse_cell(cells[c]);
    };
    auto y = cell(y_col);
    bool ok = y.has_value();
    std::vector<double> row(p);
    for (std::size_t j = 0; ok && j < p; ++j) {
      auto v = cell(x_cols[j]);
      if (!v) ok = false;
      else row[j] = *v;
    }
    if (!ok) {
      ++dropped;
      continue;
    }
    double yv = *y;
    if (spec.binarize_above) yv = yv > *spec.binarize_above ? 1.0 : 0.0;
    xs.insert(xs.end(), row.begin(), row.end());
    ys.push_back(yv);
  }
  if (ys.empty()) throw EmptyDataError("no usable rows after dropping " + std::to_string(dropped) + " incomplete rows");

  const auto n = static_cast<Eigen::Index>(ys.size());
  Eigen::MatrixXd pred(n, static_cast<Eigen::Index>(p));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(p); ++j)
      pred(i, j) = xs[static_cast<std::size_t>(i) * p + static_cast<std::size_t>(j)];
  Eigen::VectorXd resp = Eigen::Map<Eigen::VectorXd>(ys.data(), n);

  const Eigen::Index off = spec.intercept ? 1 : 0;
  DesignMatrix x(n, static_cast<Eigen::Index>(p) + off);
  if (spec.intercept) x.col(0).setOnes();
  x.rightCols(static_cast<Eigen::Index>(p)) = pred;
  return BoundDataset(spec, std::move(x), std::move(resp), dropped);
}

BoundDataset load_csv(const std::filesystem::path& path, const ModelSpec& spec) {
  return parse_csv(detail::read_text_file(path), spec);
}

// ---------------------------------------------------------------------------
// Folds

std::vector<std::size_t> FoldPlan::test_rows(int fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] == fold) rows.push_back(i);
  return rows;
}

std::vector<std::size_t> FoldPlan::train_rows(int fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] != fold) rows.push_back(i);
  return rows;
}

std::size_t FoldPlan::fold_size(int fold) const {
  return static_cast<std::size_t>(std::count(assignments.begin(), assignments.end(), fold));
}

FoldPlan make_folds(const BoundDataset& data, int k, std::uint64_t seed) {
  const std::size_t n = data.n();
  if (k < 2) throw ArgumentError("fold count must be >= 2, got " + std::to_string(k));
  if (static_cast<std::size_t>(k) > n)
    throw ArgumentError("fold count " + std::to_string(k) + " exceeds row count " + std::to_string(n));

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.stratified = data.spec().response_kind == ResponseKind::binary;
  plan.assignments.assign(n, -1);

  std::vector<std::vector<std::size_t>> strata;
  if (plan.stratified) {
    strata.resize(2);
    for (std::size_t i = 0; i < n; ++i) strata[data.response()[static_cast<Eigen::Index>(i)] == 1.0 ? 1 : 0].push_back(i);
  } else {
    strata.emplace_back(n);
    std::iota(strata[0].begin(), strata[0].end(), std::size_t{0});
  }

  // Deal shuffled rows round-robin; the counter carries across strata so the
  // overall fold sizes stay balanced too.
  std::mt19937_64 rng(seed);
  std::size_t dealt = 0;
  for (auto& stratum : strata) {
    std::shuffle(stratum.begin(), stratum.end(), rng);
    for (std::size_t row : stratum) plan.assignments[row] = static_cast<int>(dealt++ % static_cast<std::size_t>(k));
  }
  return plan;
}

}  // namespace llmprior
