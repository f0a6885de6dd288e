#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "smartinspect/classify.hpp"
#include "smartinspect/forest.hpp"
#include "smartinspect/proposals.hpp"
#include "smartinspect/semisup.hpp"

namespace smartinspect {

/// Every tunable of the pipeline. Config files are flat `key = value`
/// lines; `#` starts a comment, strings may be double-quoted.
///
///   sobel_kernel, binary_threshold, dilate_kernel_w, dilate_kernel_h,
///   t_nms, min_region_area, tile_size, tile_overlap,
///   k, keep, drop_threshold, strict_drop, kmeans_max_iter, kmeans_restarts,
///   seed, forest_trees, forest_max_depth, forest_min_leaf,
///   forest_features_per_split, forest_bootstrap,
///   model, dc_scope, iou, jobs, luma
struct PipelineConfig {
  StageOneParams stage_one;

  std::size_t k = 10;
  std::size_t keep = 6;
  std::size_t drop_threshold = 0;  // 0: 1% of the crop count
  bool strict_drop = false;
  int kmeans_max_iter = 100;
  int kmeans_restarts = 10;

  std::uint64_t seed = 0;

  int forest_trees = 100;
  int forest_max_depth = 16;
  int forest_min_leaf = 1;
  int forest_features_per_split = 0;
  bool forest_bootstrap = true;

  std::string model;  // empty: baseline descriptor
  DcScope dc_scope = DcScope::All;
  double iou = 0.3;
  int jobs = 0;  // 0: OpenMP default
  bool luma = false;

  /// Throws ConfigError naming the first out-of-range field.
  void validate() const;

  FilterParams filter_params() const;
  /// BD trees use `seed`, DC trees `seed + 1`.
  ForestParams bd_forest_params() const;
  ForestParams dc_forest_params() const;
  InspectConfig inspect_config() const;
};

/// Sets one key from its textual value. Throws ConfigError for an unknown
/// key or an unparsable value.
void set_config_value(PipelineConfig& cfg, std::string_view key, std::string_view value);

/// Parses a config document on top of the defaults. `origin` prefixes error
/// messages. The result is not validated.
PipelineConfig parse_config(std::string_view text, const std::string& origin = "config");

/// Throws IoError when the file cannot be read.
PipelineConfig load_config(const std::filesystem::path& path);

/// Canonical `key = value` dump of every field.
std::string config_to_string(const PipelineConfig& cfg);

}  // namespace smartinspect
