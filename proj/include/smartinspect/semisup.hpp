#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "smartinspect/embedding.hpp"
#include "smartinspect/region_class.hpp"

namespace smartinspect {

struct KMeansParams {
  std::size_t k = 10;
  std::uint64_t seed = 0;
  int max_iter = 100;
  /// Independent k-means++ initializations; restart r is seeded with
  /// seed + r * 0x9E3779B97F4A7C15. Lowest final loss wins, ties to the
  /// earliest restart.
  int restarts = 10;
};

struct KMeansResult {
  std::vector<FeatureVector> centroids;
  std::vector<std::size_t> assignment;
  /// Sum of squared distances of every point to its assigned centroid.
  double loss = 0.0;
  int iterations = 0;
  /// Loss after each assignment step of the winning run.
  std::vector<double> loss_history;
};

/// Squared Euclidean distance.
double squared_distance(std::span<const double> a, std::span<const double> b);

/// Loss J = sum_i ||x_i - mu_{a(i)}||^2.
double kmeans_loss(std::span<const FeatureVector> points, std::span<const FeatureVector> centroids,
                   std::span<const std::size_t> assignment);

/// Lloyd iterations from k-means++ seeding. Assignment picks the nearest
/// centroid (ties to the lowest index); a cluster left empty by an
/// assignment is re-seeded at the point farthest from its stale centroid.
/// Once the assignment stops changing, single-point transfers that lower
/// the loss are applied and Lloyd resumes; the run ends when neither moves
/// anything or after max_iter assignment steps. The loss never increases.
/// Throws std::invalid_argument if points is empty, k is 0 or exceeds the
/// point count, or the vectors are zero-length or of mixed length.
KMeansResult kmeans(std::span<const FeatureVector> points, const KMeansParams& params);

struct FilterParams {
  std::size_t k = 10;
  std::size_t keep_count = 6;
  /// 0 selects the default of 1% of the point count (at least 1).
  std::size_t drop_threshold = 0;
  std::uint64_t seed = 0;
  /// Drop labeled defects with their cluster instead of re-inserting them.
  bool strict_drop = false;
  int max_iter = 100;
  int restarts = 10;
};

struct FilterRound {
  std::vector<std::size_t> kept_clusters;
  std::size_t dropped = 0;
  std::vector<double> proportions;  // labeled-defect fraction per cluster
  std::vector<std::size_t> cluster_sizes;
  double loss = 0.0;
};

struct FilterTrace {
  std::vector<FilterRound> rounds;
  std::vector<std::size_t> retained;  // ascending point indices
  std::vector<std::size_t> dropped;   // ascending point indices
  std::size_t drop_threshold = 0;
  std::size_t point_count = 0;
  /// "below_threshold" or "retained_at_most_k".
  std::string stop_reason;
};

/// Iterative cluster filtering. Each round clusters the retained points,
/// ranks clusters by (labeled-defect points) / (cluster size), keeps the
/// keep_count best (ties to the lower cluster index) and drops the points
/// of the rest. Round r uses seed + r. Stops after a round that drops fewer
/// than drop_threshold points, or once at most k points remain.
///
/// `labels` maps point index to a human label; only defect classes count
/// toward the proportion. Throws std::invalid_argument if no labeled point
/// is a defect, keep_count >= k, or a label index is out of range.
FilterTrace cluster_filter(std::span<const FeatureVector> points, const std::map<std::size_t, RegionClass>& labels,
                           const FilterParams& params);

/// Retained points become Defect and dropped points Background; human
/// labels override with their binary projection.
std::vector<Verdict> pseudo_labels(const FilterTrace& trace, const std::map<std::size_t, RegionClass>& labels);

/// Audit document: parameters, per-round proportions, retained/dropped lists.
std::string trace_to_json(const FilterTrace& trace, const FilterParams& params);

namespace serial {
/// Nearest-centroid assignment, single-threaded.
std::vector<std::size_t> assign(std::span<const FeatureVector> points, std::span<const FeatureVector> centroids);
}  // namespace serial

/// Nearest-centroid assignment, parallel over points; identical to serial::assign.
std::vector<std::size_t> assign_nearest(std::span<const FeatureVector> points,
                                        std::span<const FeatureVector> centroids);

}  // namespace smartinspect
