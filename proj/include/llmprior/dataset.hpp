#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

namespace llmprior {

enum class ResponseKind { binary, continuous };

std::string to_string(ResponseKind kind);
ResponseKind response_kind_from_string(const std::string& s);

struct Predictor {
  std::string name;
  std::string description;
  std::string unit;
};

// Free text spliced into the elicitation prompt. Only the prompt builder
// reads these.
struct PromptContext {
  std::string expertise;             // "biostatistics and cardiovascular epidemiology"
  std::string outcome;               // "coronary artery disease (CAD)"
  std::string response_description;  // "$y \in \{0,1\}$ (0 = healthy, 1 = CAD)"
  std::string knowledge_topic;       // "CAD risk factors"
  std::string extra_context;
};

struct ModelSpec {
  std::string id;
  std::string response_name;
  ResponseKind response_kind = ResponseKind::binary;
  std::vector<Predictor> predictors;
  bool intercept = true;
  // Binary response derivation: source value > threshold maps to 1, else 0.
  std::optional<double> binarize_above;
  PromptContext prompt;

  static constexpr const char* intercept_name = "intercept";

  /// Coefficient names in design-matrix column order ("intercept" first).
  std::vector<std::string> coefficient_names() const;
  std::size_t coefficient_count() const { return predictors.size() + (intercept ? 1 : 0); }
  /// Column of `name` in the design matrix, or nullopt.
  std::optional<std::size_t> coefficient_index(const std::string& name) const;

  /// Throws ArgumentError on empty or duplicate predictor names.
  void validate() const;
};

ModelSpec model_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ModelSpec& spec);
ModelSpec load_model_spec(const std::filesystem::path& path);

using DesignMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Complete-case data bound to a ModelSpec. Immutable after construction.
class BoundDataset {
 public:
  BoundDataset(ModelSpec spec, DesignMatrix design, Eigen::VectorXd response, std::size_t dropped = 0);

  const ModelSpec& spec() const noexcept { return spec_; }
  const DesignMatrix& design() const noexcept { return design_; }
  const Eigen::VectorXd& response() const noexcept { return response_; }
  std::size_t n() const noexcept { return static_cast<std::size_t>(design_.rows()); }
  std::size_t p() const noexcept { return spec_.predictors.size(); }
  std::size_t d() const noexcept { return static_cast<std::size_t>(design_.cols()); }
  std::size_t dropped() const noexcept { return dropped_; }

  /// Rows in the given order (duplicates allowed).
  BoundDataset subset(const std::vector<std::size_t>& rows) const;

 private:
  ModelSpec spec_;
  DesignMatrix design_;
  Eigen::VectorXd response_;
  std::size_t dropped_;
};

/// Builds the design matrix from raw predictor columns (n x p, no intercept).
BoundDataset make_dataset(const ModelSpec& spec, const Eigen::MatrixXd& predictors, const Eigen::VectorXd& response);

/// Reads a comma-separated file with a header row. Rows with a missing or
/// non-numeric cell in any used column are dropped and counted.
BoundDataset load_csv(const std::filesystem::path& path, const ModelSpec& spec);
BoundDataset parse_csv(const std::string& text, const ModelSpec& spec);

struct FoldPlan {
  int k = 0;
  std::vector<int> assignments;
  std::uint64_t seed = 0;
  bool stratified = false;

  std::vector<std::size_t> test_rows(int fold) const;
  std::vector<std::size_t> train_rows(int fold) const;
  std::size_t fold_size(int fold) const;
};

/// Deterministic k-fold assignment; stratified by response for binary data.
FoldPlan make_folds(const BoundDataset& data, int k, std::uint64_t seed);

}  // namespace llmprior
