#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "smartinspect/embedding.hpp"

namespace smartinspect {

struct TrainSample {
  FeatureVector features;
  std::size_t label = 0;
};

struct ForestParams {
  int trees = 100;
  /// 0 means unbounded.
  int max_depth = 16;
  int min_leaf = 1;
  /// 0 selects floor(sqrt(dim)).
  int features_per_split = 0;
  /// Disable to train every tree on the full sample (exact small-case tests).
  bool bootstrap = true;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TreeNode {
  // internal node: feature >= 0, x[feature] <= threshold goes left
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  // leaf only
  std::vector<std::uint32_t> counts;
  std::uint32_t label = 0;

  bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  const TreeNode& leaf_for(std::span<const double> x) const;
};

struct ForestModel {
  std::string tag;
  std::size_t class_count = 0;
  std::size_t dim = 0;
  ForestParams params;
  std::vector<DecisionTree> trees;
};

struct Prediction {
  std::size_t label = 0;
  std::vector<double> votes;  // fraction of trees per class, sums to 1
};

/// CART forest with Gini impurity. Tree t is grown from seed + t on a
/// bootstrap resample (n draws with replacement). At each node, features
/// are visited in a seeded random order until features_per_split
/// non-constant ones have been scored; the split maximizing the Gini gain
/// wins, ties to the lower (feature, threshold). Thresholds are midpoints
/// between consecutive distinct values. A node becomes a leaf when pure,
/// at max_depth, or when no split leaves min_leaf samples on both sides.
///
/// Throws std::invalid_argument for an empty sample set, mixed dimensions,
/// a label >= class_count, or invalid params.
ForestModel train_forest(std::span<const TrainSample> samples, std::size_t class_count, const ForestParams& params);

/// Majority vote over trees; each tree votes its leaf's majority class.
/// Ties go to the lowest class index. Throws std::invalid_argument when
/// x.size() != model.dim.
Prediction predict(const ForestModel& model, std::span<const double> x);

inline constexpr int kForestFormatVersion = 1;

std::string model_to_json(const ForestModel& model);
ForestModel model_from_json(const std::string& text);

/// Throws std::invalid_argument for a model without trees.
void save_model(const ForestModel& model, const std::filesystem::path& path);
/// Throws IoError naming the offending field on malformed input.
ForestModel load_model(const std::filesystem::path& path);

/// Gini impurity of a class histogram.
double gini(std::span<const std::uint32_t> counts);

namespace serial {
/// Trees grown one after another; identical output to train_forest.
ForestModel train_forest(std::span<const TrainSample> samples, std::size_t class_count, const ForestParams& params);
}  // namespace serial

}  // namespace smartinspect
