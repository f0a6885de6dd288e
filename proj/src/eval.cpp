#include "smartinspect/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace smartinspect {

MetricSet metrics(const ConfusionCounts& c) {
  if (c.total() == 0) throw std::invalid_argument("metrics: all confusion counts are zero");
  auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  return {ratio(c.tp, c.tp + c.fn), ratio(c.tn, c.tn + c.fp), ratio(c.tp, c.tp + c.fp),
          ratio(c.tp + c.tn, c.total())};
}

MatchResult match(const InspectionReport& report, const GroundTruth& truth, double iou_thresh) {
  if (!(iou_thresh > 0.0 && iou_thresh <= 1.0)) throw std::invalid_argument("match: iou threshold must lie in (0, 1]");
  struct Candidate {
    double iou;
    std::size_t f;
    std::size_t t;
  };
  std::vector<Candidate> candidates;
  for (std::size_t f = 0; f < report.findings.size(); ++f) {
    for (std::size_t t = 0; t < truth.entries.size(); ++t) {
      const double v = iou(report.findings[f].region.bbox, truth.entries[t].bbox);
      if (v >= iou_thresh) candidates.push_back({v, f, t});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (a.f != b.f) return a.f < b.f;
    return a.t < b.t;
  });

  MatchResult result;
  std::vector<bool> finding_used(report.findings.size(), false);
  std::vector<bool> truth_used(truth.entries.size(), false);
  for (const Candidate& c : candidates) {
    if (finding_used[c.f] || truth_used[c.t]) continue;
    finding_used[c.f] = true;
    truth_used[c.t] = true;
    result.pairs.emplace_back(c.f, c.t);
    const Finding& finding = report.findings[c.f];
    const RegionClass truth_cls = truth.entries[c.t].cls;
    const bool said_defect = finding.verdict == Verdict::Defect;
    const bool is_def = is_defect(truth_cls);
    if (said_defect && is_def) ++result.counts.tp;
    if (!said_defect && !is_def) ++result.counts.tn;
    if (said_defect && !is_def) ++result.counts.fp;
    if (!said_defect && is_def) ++result.counts.fn;
    ++result.matrix[wire_index(truth_cls)][wire_index(finding.cls)];
  }
  for (std::size_t t = 0; t < truth.entries.size(); ++t) {
    if (!truth_used[t] && is_defect(truth.entries[t].cls)) ++result.counts.fn;
  }
  for (std::size_t f = 0; f < report.findings.size(); ++f) {
    if (!finding_used[f] && report.findings[f].verdict == Verdict::Defect) ++result.counts.fp;
  }
  return result;
}

void write_table_csv(std::ostream& out, const std::vector<SampleRow>& rows) {
  auto fmt = [](const std::optional<double>& v) -> std::string {
    if (!v) return "undefined";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", *v);
    return buf;
  };
  out << "sample,regions,types,tp,fn,tn,fp,sensitivity,specificity,precision,accuracy\n";
  for (const SampleRow& r : rows) {
    out << r.sample << ',' << r.regions << ',' << r.types << ',' << r.counts.tp << ',' << r.counts.fn << ','
        << r.counts.tn << ',' << r.counts.fp << ',' << fmt(r.metrics.sensitivity) << ','
        << fmt(r.metrics.specificity) << ',' << fmt(r.metrics.precision) << ',' << fmt(r.metrics.accuracy) << '\n';
  }
}

}  // namespace smartinspect
