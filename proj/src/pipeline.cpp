#include "smartinspect/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "smartinspect/errors.hpp"
#include "smartinspect/image_io.hpp"
#include "smartinspect/random.hpp"

namespace smartinspect {

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

bool is_image_file(const fs::path& p) {
  const auto ext = p.extension().string();
  return ext == ".png" || ext == ".pgm";
}

std::vector<fs::path> sorted_files(const fs::path& dir, bool recursive, auto&& keep) {
  std::vector<fs::path> out;
  if (recursive) {
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
      if (e.is_regular_file() && keep(e.path())) out.push_back(e.path());
    }
  } else {
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.is_regular_file() && keep(e.path())) out.push_back(e.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<fs::path> collect_images(const std::vector<fs::path>& inputs) {
  std::vector<fs::path> out;
  for (const fs::path& p : inputs) {
    if (fs::is_directory(p)) {
      auto files = sorted_files(p, false, is_image_file);
      out.insert(out.end(), files.begin(), files.end());
    } else if (fs::exists(p)) {
      out.push_back(p);
    } else {
      throw IoError("no such file or directory '" + p.string() + "'");
    }
  }
  return out;
}

ProposeSummary run_propose(const std::vector<fs::path>& images, const fs::path& out, const PipelineConfig& cfg) {
  cfg.validate();
  fs::create_directories(out / "crops");
  ProposeSummary summary;
  std::vector<Region> all;
  for (const fs::path& path : images) {
    GrayImage img;
    try {
      img = read_image(path, cfg.luma);
    } catch (const IoError& e) {
      summary.errors.push_back(e.what());
      continue;
    }
    const std::string source = path.stem().string();
    const std::vector<Region> regions = propose(img, cfg.stage_one, source);
    for (std::size_t i = 0; i < regions.size(); ++i) {
      write_png(out / "crops" / (crop_id(source, i) + ".png"), extract_crop(img, regions[i]).pixels);
    }
    all.insert(all.end(), regions.begin(), regions.end());
    ++summary.images;
  }
  write_proposals_file(out / "proposals.txt", all);
  summary.regions = all.size();
  return summary;
}

TrainedModels train_models(const std::vector<std::string>& ids, const std::vector<FeatureVector>& features,
                           const LabelSet& labels, const PipelineConfig& cfg) {
  std::map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], i);
  std::map<std::size_t, RegionClass> by_index;
  for (const auto& [id, cls] : labels.entries) {
    const auto it = index.find(id);
    if (it == index.end()) throw std::invalid_argument("label for unknown crop '" + id + "'");
    by_index.emplace(it->second, cls);
  }

  TrainedModels m;
  m.filter = cfg.filter_params();
  m.trace = cluster_filter(features, by_index, m.filter);
  const std::vector<Verdict> pseudo = pseudo_labels(m.trace, by_index);
  m.bd = train_bd(features, pseudo, cfg.bd_forest_params());
  m.dc = train_dc(labels, ids, features, cfg.dc_forest_params());
  return m;
}

std::vector<std::pair<std::string, GrayImage>> read_crops(const fs::path& crops_dir) {
  if (!fs::is_directory(crops_dir)) throw IoError("crops directory '" + crops_dir.string() + "' does not exist");
  std::vector<std::pair<std::string, GrayImage>> crops;
  for (const fs::path& p : sorted_files(crops_dir, false, [](const fs::path& f) { return f.extension() == ".png"; })) {
    crops.emplace_back(p.stem().string(), read_png(p));
  }
  if (crops.empty()) throw IoError("no crops in '" + crops_dir.string() + "'");
  return crops;
}

TrainedModels run_train(const fs::path& crops_dir, const fs::path& labels_path, const fs::path& out,
                        const PipelineConfig& cfg, const EmbeddingProvider& provider,
                        const std::optional<fs::path>& cache_dir) {
  cfg.validate();
  LabelSet labels = read_labels_csv(labels_path);
  const auto crops = read_crops(crops_dir);
  std::vector<std::string> ids;
  std::vector<GrayImage> images;
  ids.reserve(crops.size());
  images.reserve(crops.size());
  for (const auto& [id, img] : crops) {
    ids.push_back(id);
    images.push_back(img);
  }
  const std::vector<FeatureVector> features = embed_all(images, provider, cache_dir);
  TrainedModels m = train_models(ids, features, labels, cfg);
  fs::create_directories(out);
  save_model(m.bd, out / "bd.model");
  save_model(m.dc, out / "dc.model");
  write_text(out / "filter_trace.json", trace_to_json(m.trace, m.filter) + "\n");
  return m;
}

std::vector<InspectionReport> run_inspect(const std::vector<fs::path>& images, const ForestModel& bd,
                                          const ForestModel& dc, const EmbeddingProvider& provider,
                                          const PipelineConfig& cfg, const fs::path& out, bool render) {
  cfg.validate();
  check_models(bd, dc, provider);
  fs::create_directories(out);
  std::vector<InspectionReport> reports;
  for (const fs::path& path : images) {
    const GrayImage img = read_image(path, cfg.luma);
    const std::string source = path.stem().string();
    InspectionReport report = inspect(img, bd, dc, provider, cfg.inspect_config(), source);
    write_text(out / (source + ".json"), report_to_json(report) + "\n");
    if (render) write_png(out / (source + ".png"), render_report(img, report));
    reports.push_back(std::move(report));
  }
  return reports;
}

std::map<std::string, GroundTruth> read_truth_dir(const fs::path& truth_dir) {
  if (!fs::is_directory(truth_dir)) throw IoError("truth directory '" + truth_dir.string() + "' does not exist");
  std::map<std::string, GroundTruth> out;
  for (const fs::path& p : sorted_files(truth_dir, true, [](const fs::path& f) {
         return f.extension() == ".json" && f.filename() != "manifest.json";
       })) {
    out.emplace(p.stem().string(), truth_from_json(slurp(p)).first);
  }
  return out;
}

EvalSummary run_eval(const fs::path& reports_dir, const fs::path& truth_dir, double iou_thresh) {
  if (!fs::is_directory(reports_dir)) throw IoError("reports directory '" + reports_dir.string() + "' does not exist");
  if (!fs::is_directory(truth_dir)) throw IoError("truth directory '" + truth_dir.string() + "' does not exist");

  std::map<std::string, InspectionReport> reports;
  for (const fs::path& p :
       sorted_files(reports_dir, true, [](const fs::path& f) { return f.extension() == ".json"; })) {
    InspectionReport r = report_from_json(slurp(p));
    reports.emplace(r.source_id, std::move(r));
  }

  struct Group {
    ConfusionCounts counts;
    std::size_t regions = 0;
    std::set<RegionClass> types;
  };
  std::map<std::string, Group> groups;
  EvalSummary summary;
  for (const fs::path& p : sorted_files(truth_dir, true, [](const fs::path& f) {
         return f.extension() == ".json" && f.filename() != "manifest.json";
       })) {
    const std::string id = p.stem().string();
    const auto it = reports.find(id);
    if (it == reports.end()) {
      std::cerr << "warning: no report for truth '" << id << "'\n";
      continue;
    }
    auto [truth, profile] = truth_from_json(slurp(p));
    if (profile.empty()) profile = "all";
    const MatchResult m = match(it->second, truth, iou_thresh);
    Group& g = groups[profile];
    g.counts += m.counts;
    g.regions += m.counts.total();
    for (const TruthEntry& e : truth.entries) g.types.insert(e.cls);
    for (std::size_t r = 0; r < kRegionClassCount; ++r) {
      for (std::size_t c = 0; c < kRegionClassCount; ++c) summary.matrix[r][c] += m.matrix[r][c];
    }
    ++summary.pairs;
  }
  if (summary.pairs == 0) {
    throw IoError("no report/truth pairs found under '" + reports_dir.string() + "' and '" + truth_dir.string() + "'");
  }

  std::vector<std::string> order;
  for (const char* known : {"clean", "dust", "scratch", "pit_crack"}) {
    if (groups.count(known)) order.emplace_back(known);
  }
  for (const auto& [name, g] : groups) {
    if (std::find(order.begin(), order.end(), name) == order.end()) order.push_back(name);
  }
  for (const std::string& name : order) {
    const Group& g = groups[name];
    SampleRow row;
    row.sample = name;
    row.regions = g.regions;
    for (RegionClass c : g.types) {
      if (!row.types.empty()) row.types += '+';
      row.types += class_name(c);
    }
    row.counts = g.counts;
    if (g.counts.total() > 0) row.metrics = metrics(g.counts);
    summary.rows.push_back(std::move(row));
  }
  return summary;
}

void write_matrix_csv(std::ostream& out, const ClassMatrix& m) {
  out << "truth\\predicted";
  for (RegionClass c : kAllRegionClasses) out << ',' << class_name(c);
  out << '\n';
  for (RegionClass r : kAllRegionClasses) {
    out << class_name(r);
    for (RegionClass c : kAllRegionClasses) out << ',' << m[wire_index(r)][wire_index(c)];
    out << '\n';
  }
}

std::vector<std::optional<RegionClass>> label_from_truth(const std::vector<Region>& regions,
                                                         const std::map<std::string, GroundTruth>& truth,
                                                         double min_iou) {
  std::vector<std::optional<RegionClass>> out(regions.size());
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto it = truth.find(regions[i].source_id);
    if (it == truth.end()) continue;
    double best = min_iou;
    for (const TruthEntry& e : it->second.entries) {
      const double v = iou(regions[i].bbox, e.bbox);
      if (v >= best && (!out[i] || v > best)) {
        best = v;
        out[i] = e.cls;
      }
    }
  }
  return out;
}

LabelSet select_labels(const std::vector<std::string>& ids, const std::vector<std::optional<RegionClass>>& classes,
                       const std::array<std::size_t, kRegionClassCount>& counts, std::uint64_t seed) {
  if (ids.size() != classes.size()) throw std::invalid_argument("select_labels: ids and classes differ in length");
  std::array<std::vector<std::size_t>, kRegionClassCount> pools;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (classes[i]) pools[wire_index(*classes[i])].push_back(i);
  }
  Rng rng(seed);
  LabelSet labels;
  for (RegionClass c : kAllRegionClasses) {
    auto& pool = pools[wire_index(c)];
    const std::size_t want = counts[wire_index(c)];
    if (pool.size() < want) {
      throw std::invalid_argument("select_labels: only " + std::to_string(pool.size()) + " " +
                                  std::string(class_name(c)) + " candidates, " + std::to_string(want) + " requested");
    }
    // partial Fisher-Yates
    for (std::size_t k = 0; k < want; ++k) {
      const std::size_t j = k + rng.index(pool.size() - k);
      std::swap(pool[k], pool[j]);
      labels.entries.emplace(ids[pool[k]], c);
    }
  }
  return labels;
}

}  // namespace smartinspect
