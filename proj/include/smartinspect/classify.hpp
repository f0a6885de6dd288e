#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "smartinspect/embedding.hpp"
#include "smartinspect/forest.hpp"
#include "smartinspect/image_io.hpp"
#include "smartinspect/proposals.hpp"
#include "smartinspect/region_class.hpp"

namespace smartinspect {

enum class Provenance { Human, Pseudo };

/// crop id -> class. Label files are CSV `crop_id,class_name` with an
/// optional `crop_id,class_name` header row.
struct LabelSet {
  std::map<std::string, RegionClass> entries;
  Provenance provenance = Provenance::Human;
};

LabelSet read_labels_csv(const std::filesystem::path& path);
void write_labels_csv(const std::filesystem::path& path, const LabelSet& labels);

/// Per-class entry counts in wire-index order.
std::array<std::size_t, kRegionClassCount> class_counts(const LabelSet& labels);

/// Binary background/defect forest (class 0 = background, 1 = defect),
/// tagged "BD". Throws std::invalid_argument unless both classes occur.
ForestModel train_bd(std::span<const FeatureVector> features, std::span<const Verdict> labels,
                     const ForestParams& params);

/// Six-class forest over human labels, tagged "DC". `ids` and `features`
/// are parallel; every labeled id must be present. Throws
/// std::invalid_argument for pseudo provenance, an empty label set, fewer
/// than two distinct classes, or a label without a feature vector.
ForestModel train_dc(const LabelSet& labels, std::span<const std::string> ids,
                     std::span<const FeatureVector> features, const ForestParams& params);

enum class DcScope { All, DefectsOnly };

std::string_view dc_scope_name(DcScope s);
std::optional<DcScope> parse_dc_scope(std::string_view s);

struct InspectConfig {
  StageOneParams stage_one;
  DcScope dc_scope = DcScope::All;
};

struct Finding {
  Region region;
  RegionClass cls = RegionClass::Scratch;  // DC class
  Verdict verdict = Verdict::Background;   // BD verdict
  std::vector<double> votes;               // DC vote fractions, wire order
};

struct InspectionReport {
  std::string source_id;
  std::vector<Finding> findings;  // proposal selection order
};

/// Checks that both models match the provider's dimension and have 2 and 6
/// classes respectively; throws ContractViolation otherwise.
void check_models(const ForestModel& bd, const ForestModel& dc, const EmbeddingProvider& provider);

/// Stages I-IV on one frame. With DcScope::All every proposal is reported;
/// with DefectsOnly only proposals the BD model calls Defect.
InspectionReport inspect(const GrayImage& image, const ForestModel& bd, const ForestModel& dc,
                         const EmbeddingProvider& provider, const InspectConfig& config,
                         const std::string& source_id);

std::string report_to_json(const InspectionReport& report);
InspectionReport report_from_json(const std::string& text);

/// Grayscale frame with each finding's bbox outlined in its class colour.
RgbImage render_report(const GrayImage& image, const InspectionReport& report);

}  // namespace smartinspect
