#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "spchar/dataset.hpp"

namespace spchar {

struct TreeHyperparams {
  std::uint32_t max_depth = 8;
  std::uint32_t min_samples_leaf = 5;
  double min_gain = 0.0;
  bool operator==(const TreeHyperparams&) const = default;
};

inline constexpr std::uint32_t kUnlimitedDepth = std::numeric_limits<std::uint32_t>::max();

struct TreeNode {
  // -1 marks a leaf.
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double prediction = 0.0;
  std::uint64_t samples = 0;
  double sse = 0.0;

  [[nodiscard]] bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct RegressionTree {
  std::vector<std::string> feature_names;
  std::string target_name;
  TreeHyperparams hyperparams;
  // nodes[0] is the root.
  std::vector<TreeNode> nodes;
  // Aligned with feature_names; sums to 1 unless the tree is a single leaf.
  std::vector<double> importances;
  std::string dataset_digest;
  // Free-form provenance carried through serialization.
  nlohmann::json metadata = nlohmann::json::object();

  [[nodiscard]] std::map<std::string, double> importance_map() const;
  [[nodiscard]] std::size_t split_count() const;
  bool operator==(const RegressionTree&) const = default;
};

class TreeError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// CART regression tree. Candidate thresholds are midpoints between
/// consecutive distinct values; gain = SSE(parent) - SSE(left) - SSE(right).
/// Ties go to the lower feature index, then the lower threshold. Stops at
/// max_depth, when a child would get fewer than min_samples_leaf rows, on
/// zero variance, or when the best gain is not positive or below min_gain.
/// Importance = gain accumulated per feature, normalized.
RegressionTree fit(const Dataset& d, const TreeHyperparams& hp = {});

/// Goes left when feature <= threshold.
double predict(const RegressionTree& t, std::span<const double> features);
/// Index of the leaf reached by `features`.
std::size_t leaf_of(const RegressionTree& t, std::span<const double> features);

nlohmann::json tree_to_json(const RegressionTree& t);
RegressionTree tree_from_json(const nlohmann::json& j);

struct FoldResult {
  std::size_t size = 0;
  double mape = 0.0;
  std::size_t zero_targets = 0;
};

struct KFoldReport {
  std::uint32_t k = 0;
  std::uint64_t seed = 0;
  std::vector<FoldResult> folds;
  double mean_mape = 0.0;
  double r2 = 0.0;
  double median_relative_error = 0.0;
  // Rows excluded from MAPE because the actual target is zero.
  std::vector<std::string> zero_target_ids;
};

/// Seeded shuffle of [0, n) split into k folds whose sizes differ by <= 1.
std::vector<std::vector<std::size_t>> kfold_indices(std::size_t n, std::uint32_t k, std::uint64_t seed);

/// Mean absolute percentage error in percent; zero actuals are skipped and
/// counted in `zero_count`.
double mape(std::span<const double> predicted, std::span<const double> actual, std::size_t* zero_count = nullptr);

KFoldReport kfold_validate(const Dataset& d, std::uint32_t k, const TreeHyperparams& hp = {}, std::uint64_t seed = 0);
nlohmann::json kfold_to_json(const KFoldReport& r);

struct ModelEntry {
  std::string platform;
  std::string kernel;
  RegressionTree tree;
  [[nodiscard]] std::string label() const { return platform + "/" + kernel; }
};

struct RankedModel {
  std::string label;
  std::vector<std::pair<std::string, double>> ranked;
  bool empty = false;
};

struct ImportanceReport {
  double min_importance = 0.0;
  std::vector<RankedModel> models;
  // Above the threshold in every model.
  std::vector<std::string> common;
  // Above the threshold in some but not all models, with those model labels.
  std::map<std::string, std::vector<std::string>> distinct;
  std::vector<std::string> notes;
};

ImportanceReport importance_report(const std::vector<ModelEntry>& models, double min_importance = 0.05);
nlohmann::json report_to_json(const ImportanceReport& r);
std::string report_to_text(const ImportanceReport& r);

}  // namespace spchar
