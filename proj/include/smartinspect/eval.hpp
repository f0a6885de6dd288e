#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "smartinspect/classify.hpp"
#include "smartinspect/synth.hpp"

namespace smartinspect {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;

  std::size_t total() const { return tp + fn + tn + fp; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fn += o.fn;
    tn += o.tn;
    fp += o.fp;
    return *this;
  }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// nullopt marks a metric whose denominator is zero.
struct MetricSet {
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  std::optional<double> precision;
  std::optional<double> accuracy;
};

/// Throws std::invalid_argument when all four counts are zero.
MetricSet metrics(const ConfusionCounts& c);

/// Rows: truth class, columns: DC class, both in wire order.
using ClassMatrix = std::array<std::array<std::size_t, kRegionClassCount>, kRegionClassCount>;

struct MatchResult {
  ConfusionCounts counts;
  ClassMatrix matrix{};
  /// (finding index, truth index) in matching order.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

/// Greedy one-to-one matching: candidate pairs with IoU >= iou_thresh are
/// taken by descending IoU (ties: lower finding index, then lower truth
/// index) while both sides are free. Matched pairs count by (BD verdict,
/// truth projection); an unmatched defect truth is a FN and an unmatched
/// Defect finding a FP. Throws std::invalid_argument unless
/// 0 < iou_thresh <= 1.
MatchResult match(const InspectionReport& report, const GroundTruth& truth, double iou_thresh = 0.3);

struct SampleRow {
  std::string sample;
  std::size_t regions = 0;
  std::string types;  // truth classes present, wire order, '+'-joined
  ConfusionCounts counts;
  MetricSet metrics;
};

/// Header `sample,regions,types,tp,fn,tn,fp,sensitivity,specificity,precision,accuracy`;
/// undefined metrics print as `undefined`, defined ones with 4 decimals.
void write_table_csv(std::ostream& out, const std::vector<SampleRow>& rows);

}  // namespace smartinspect
