#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "smartinspect/classify.hpp"
#include "smartinspect/config.hpp"
#include "smartinspect/embedding.hpp"
#include "smartinspect/eval.hpp"
#include "smartinspect/forest.hpp"
#include "smartinspect/semisup.hpp"
#include "smartinspect/synth.hpp"

namespace smartinspect {

namespace fs = std::filesystem;

/// Files named directly, plus every .png/.pgm directly inside named
/// directories (sorted by file name). Throws IoError for a missing path.
std::vector<fs::path> collect_images(const std::vector<fs::path>& inputs);

struct ProposeSummary {
  std::size_t images = 0;
  std::size_t regions = 0;
  std::vector<std::string> errors;  // one per unreadable input
};

/// Stage I over every image. Writes `<out>/proposals.txt` (all images, in
/// input order) and `<out>/crops/<source_id>_<i>.png`. The source id is the
/// file stem. Unreadable images are reported and skipped.
ProposeSummary run_propose(const std::vector<fs::path>& images, const fs::path& out, const PipelineConfig& cfg);

struct TrainedModels {
  ForestModel bd;
  ForestModel dc;
  FilterTrace trace;
  FilterParams filter;
};

/// Stages II-IV training: cluster filtering over all features, BD on the
/// resulting pseudo-labels, DC on the human labels.
TrainedModels train_models(const std::vector<std::string>& ids, const std::vector<FeatureVector>& features,
                           const LabelSet& labels, const PipelineConfig& cfg);

/// Crop PNGs in `crops_dir`, sorted by file name; ids are the stems.
std::vector<std::pair<std::string, GrayImage>> read_crops(const fs::path& crops_dir);

/// Embeds the crops, trains, and writes `<out>/bd.model`, `<out>/dc.model`
/// and `<out>/filter_trace.json`.
TrainedModels run_train(const fs::path& crops_dir, const fs::path& labels_path, const fs::path& out,
                        const PipelineConfig& cfg, const EmbeddingProvider& provider,
                        const std::optional<fs::path>& cache_dir = std::nullopt);

/// Inspects each image and writes `<out>/<stem>.json` (and `<stem>.png`
/// when `render` is set). Returns the reports in input order.
std::vector<InspectionReport> run_inspect(const std::vector<fs::path>& images, const ForestModel& bd,
                                          const ForestModel& dc, const EmbeddingProvider& provider,
                                          const PipelineConfig& cfg, const fs::path& out, bool render);

struct EvalSummary {
  std::vector<SampleRow> rows;  // one per truth profile
  ClassMatrix matrix{};
  std::size_t pairs = 0;
};

/// Pairs every report (`*.json` under reports_dir, keyed by source_id) with
/// the truth file of the same id (`*.json` under truth_dir except
/// manifests), matches them and aggregates per truth profile. Profiles
/// print in the order clean, dust, scratch, pit_crack, then by name.
/// Throws IoError when no pair is found.
EvalSummary run_eval(const fs::path& reports_dir, const fs::path& truth_dir, double iou_thresh);

void write_matrix_csv(std::ostream& out, const ClassMatrix& m);

// --- demo labeling -----------------------------------------------------------

/// Class of the truth entry with the highest IoU (>= min_iou) for each
/// region; nullopt when nothing overlaps enough.
std::vector<std::optional<RegionClass>> label_from_truth(const std::vector<Region>& regions,
                                                         const std::map<std::string, GroundTruth>& truth,
                                                         double min_iou = 0.5);

/// Demo label counts in wire order: one tenth of the reference labeling
/// effort (30 light reflections, 270 scratches, 210 pits, 280 cracks,
/// 150 dust, 130 sensor regions).
inline constexpr std::array<std::size_t, kRegionClassCount> kDemoLabelCounts = {27, 21, 28, 15, 13, 3};

/// Picks `counts[c]` crops of each class from the truth-labeled candidates,
/// uniformly at random under `seed`. Throws std::invalid_argument when a
/// class has too few candidates.
LabelSet select_labels(const std::vector<std::string>& ids, const std::vector<std::optional<RegionClass>>& classes,
                       const std::array<std::size_t, kRegionClassCount>& counts, std::uint64_t seed);

/// Every truth file under `truth_dir` keyed by id.
std::map<std::string, GroundTruth> read_truth_dir(const fs::path& truth_dir);

}  // namespace smartinspect
