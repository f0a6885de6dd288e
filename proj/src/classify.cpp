#include "smartinspect/classify.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "smartinspect/errors.hpp"

namespace smartinspect {

namespace {

constexpr std::array<std::string_view, kRegionClassCount> kClassNames = {
    "scratch", "pit", "crack", "dust", "sensor_region", "light_reflection"};

}  // namespace

std::string_view class_name(RegionClass c) { return kClassNames[wire_index(c)]; }

std::optional<RegionClass> parse_class(std::string_view name) {
  for (std::size_t i = 0; i < kClassNames.size(); ++i) {
    if (kClassNames[i] == name) return static_cast<RegionClass>(i);
  }
  return std::nullopt;
}

std::optional<RegionClass> class_from_index(std::size_t index) {
  if (index >= kRegionClassCount) return std::nullopt;
  return static_cast<RegionClass>(index);
}

std::string_view verdict_name(Verdict v) { return v == Verdict::Defect ? "defect" : "background"; }

Rgb class_color(RegionClass c) {
  switch (c) {
    case RegionClass::Scratch:
      return {255, 0, 0};
    case RegionClass::Pit:
    case RegionClass::Crack:
      return {0, 255, 0};
    case RegionClass::Dust:
    case RegionClass::LightReflection:
      return {255, 255, 0};
    case RegionClass::SensorRegion:
      return {128, 0, 128};
  }
  return {255, 255, 255};
}

std::string_view class_color_name(RegionClass c) {
  switch (c) {
    case RegionClass::Scratch:
      return "red";
    case RegionClass::Pit:
    case RegionClass::Crack:
      return "green";
    case RegionClass::Dust:
    case RegionClass::LightReflection:
      return "yellow";
    case RegionClass::SensorRegion:
      return "purple";
  }
  return "white";
}

std::string_view dc_scope_name(DcScope s) { return s == DcScope::All ? "all" : "defects-only"; }

std::optional<DcScope> parse_dc_scope(std::string_view s) {
  if (s == "all") return DcScope::All;
  if (s == "defects-only") return DcScope::DefectsOnly;
  return std::nullopt;
}

// --- label files -------------------------------------------------------------

LabelSet read_labels_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open label file '" + path.string() + "'");
  LabelSet labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected `crop_id,class_name`");
    }
    const std::string id = line.substr(0, comma);
    const std::string name = line.substr(comma + 1);
    if (line_no == 1 && id == "crop_id") continue;
    const auto cls = parse_class(name);
    if (!cls) throw IoError(path.string() + ":" + std::to_string(line_no) + ": unknown class '" + name + "'");
    if (!labels.entries.emplace(id, *cls).second) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": duplicate crop id '" + id + "'");
    }
  }
  return labels;
}

void write_labels_csv(const std::filesystem::path& path, const LabelSet& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "crop_id,class_name\n";
  for (const auto& [id, cls] : labels.entries) out << id << ',' << class_name(cls) << '\n';
}

std::array<std::size_t, kRegionClassCount> class_counts(const LabelSet& labels) {
  std::array<std::size_t, kRegionClassCount> counts{};
  for (const auto& [id, cls] : labels.entries) ++counts[wire_index(cls)];
  return counts;
}

// --- training ---------------------------------------------------------------

ForestModel train_bd(std::span<const FeatureVector> features, std::span<const Verdict> labels,
                     const ForestParams& params) {
  if (features.size() != labels.size()) throw std::invalid_argument("train_bd: features and labels differ in length");
  std::vector<TrainSample> samples;
  samples.reserve(features.size());
  bool seen[2] = {false, false};
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto label = static_cast<std::size_t>(labels[i]);
    seen[label] = true;
    samples.push_back({features[i], label});
  }
  if (!seen[0] || !seen[1]) {
    throw std::invalid_argument("train_bd: both background and defect samples are required");
  }
  ForestModel model = train_forest(samples, 2, params);
  model.tag = "BD";
  return model;
}

ForestModel train_dc(const LabelSet& labels, std::span<const std::string> ids, std::span<const FeatureVector> features,
                     const ForestParams& params) {
  if (labels.provenance != Provenance::Human) throw std::invalid_argument("train_dc: labels must be human-provided");
  if (labels.entries.empty()) throw std::invalid_argument("train_dc: no labels");
  if (ids.size() != features.size()) throw std::invalid_argument("train_dc: ids and features differ in length");
  std::map<std::string_view, std::size_t> position;
  for (std::size_t i = 0; i < ids.size(); ++i) position.emplace(ids[i], i);

  std::vector<TrainSample> samples;
  std::set<RegionClass> present;
  for (const auto& [id, cls] : labels.entries) {
    auto it = position.find(id);
    if (it == position.end()) throw std::invalid_argument("train_dc: no feature vector for labeled crop '" + id + "'");
    samples.push_back({features[it->second], wire_index(cls)});
    present.insert(cls);
  }
  if (present.size() < 2) throw std::invalid_argument("train_dc: labels cover fewer than two classes");
  ForestModel model = train_forest(samples, kRegionClassCount, params);
  model.tag = "DC";
  return model;
}

// --- inspection -------------------------------------------------------------

void check_models(const ForestModel& bd, const ForestModel& dc, const EmbeddingProvider& provider) {
  if (bd.class_count != 2) throw ContractViolation("BD model must have 2 classes");
  if (dc.class_count != kRegionClassCount) throw ContractViolation("DC model must have 6 classes");
  if (bd.dim != provider.dim() || dc.dim != provider.dim()) {
    throw ContractViolation("model dimension (BD " + std::to_string(bd.dim) + ", DC " + std::to_string(dc.dim) +
                            ") does not match embedding provider '" + provider.id() + "' dim " +
                            std::to_string(provider.dim()));
  }
}

InspectionReport inspect(const GrayImage& image, const ForestModel& bd, const ForestModel& dc,
                         const EmbeddingProvider& provider, const InspectConfig& config,
                         const std::string& source_id) {
  check_models(bd, dc, provider);
  const std::vector<Region> regions = propose(image, config.stage_one, source_id);
  std::vector<GrayImage> crops;
  crops.reserve(regions.size());
  for (const Region& r : regions) crops.push_back(extract_crop(image, r).pixels);
  const std::vector<FeatureVector> features = embed_all(crops, provider);

  std::vector<Finding> all(regions.size());
  const auto n = static_cast<std::ptrdiff_t>(regions.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const Prediction b = predict(bd, features[i]);
    const Prediction d = predict(dc, features[i]);
    all[i] = {regions[i], static_cast<RegionClass>(d.label), static_cast<Verdict>(b.label), d.votes};
  }

  InspectionReport report;
  report.source_id = source_id;
  for (Finding& f : all) {
    if (config.dc_scope == DcScope::DefectsOnly && f.verdict != Verdict::Defect) continue;
    report.findings.push_back(std::move(f));
  }
  return report;
}

std::string report_to_json(const InspectionReport& report) {
  nlohmann::json findings = nlohmann::json::array();
  for (const Finding& f : report.findings) {
    const BBox& b = f.region.bbox;
    findings.push_back({{"bbox", {b.x0, b.y0, b.w, b.h}},
                        {"score", f.region.score},
                        {"class", class_name(f.cls)},
                        {"verdict", verdict_name(f.verdict)},
                        {"votes", f.votes},
                        {"color", class_color_name(f.cls)}});
  }
  nlohmann::json j{{"source_id", report.source_id}, {"findings", std::move(findings)}};
  return j.dump(2);
}

InspectionReport report_from_json(const std::string& text) {
  InspectionReport report;
  try {
    const auto j = nlohmann::json::parse(text);
    report.source_id = j.at("source_id").get<std::string>();
    for (const auto& f : j.at("findings")) {
      Finding finding;
      const auto box = f.at("bbox").get<std::vector<int>>();
      if (box.size() != 4) throw IoError("report: bbox must have 4 entries");
      finding.region.bbox = {box[0], box[1], box[2], box[3]};
      finding.region.score = f.value("score", 0.0);
      finding.region.area = static_cast<std::int64_t>(finding.region.score);
      finding.region.source_id = report.source_id;
      const auto cls = parse_class(f.at("class").get<std::string>());
      if (!cls) throw IoError("report: unknown class '" + f.at("class").get<std::string>() + "'");
      finding.cls = *cls;
      const auto verdict = f.at("verdict").get<std::string>();
      if (verdict != "defect" && verdict != "background") throw IoError("report: unknown verdict '" + verdict + "'");
      finding.verdict = verdict == "defect" ? Verdict::Defect : Verdict::Background;
      finding.votes = f.value("votes", std::vector<double>{});
      report.findings.push_back(std::move(finding));
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("report: ") + e.what());
  }
  return report;
}

RgbImage render_report(const GrayImage& image, const InspectionReport& report) {
  RgbImage out(image);
  for (const Finding& f : report.findings) {
    const Rgb c = class_color(f.cls);
    // outline one pixel outside the box where possible
    const int x0 = std::max(0, f.region.bbox.x0 - 1);
    const int y0 = std::max(0, f.region.bbox.y0 - 1);
    const int x1 = std::min(image.width() - 1, f.region.bbox.x1());
    const int y1 = std::min(image.height() - 1, f.region.bbox.y1());
    for (int x = x0; x <= x1; ++x) {
      out.set(x, y0, c.r, c.g, c.b);
      out.set(x, y1, c.r, c.g, c.b);
    }
    for (int y = y0; y <= y1; ++y) {
      out.set(x0, y, c.r, c.g, c.b);
      out.set(x1, y, c.r, c.g, c.b);
    }
  }
  return out;
}

}  // namespace smartinspect
