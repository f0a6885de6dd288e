#include <omp.h>

#include <fstream>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "smartinspect/config.hpp"
#include "smartinspect/errors.hpp"
#include "smartinspect/pipeline.hpp"
#ifdef SMARTINSPECT_HAVE_ONNX
#include "smartinspect/model_embedder.hpp"
#endif

namespace si = smartinspect;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kIo = 3, kContract = 4 };

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<std::size_t> k;
  std::optional<std::size_t> keep;
  std::optional<std::size_t> drop_threshold;
  bool strict_drop = false;
  std::optional<std::string> dc_scope;
  std::optional<std::string> model;
  bool luma = false;
  std::vector<std::string> sets;
};

si::PipelineConfig build_config(const Overrides& o) {
  si::PipelineConfig cfg = o.config_path.empty() ? si::PipelineConfig{} : si::load_config(o.config_path);
  for (const std::string& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw si::ConfigError("--set expects key=value, got '" + kv + "'");
    si::set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.seed) cfg.seed = *o.seed;
  if (o.jobs) cfg.jobs = *o.jobs;
  if (o.k) cfg.k = *o.k;
  if (o.keep) cfg.keep = *o.keep;
  if (o.drop_threshold) cfg.drop_threshold = *o.drop_threshold;
  if (o.strict_drop) cfg.strict_drop = true;
  if (o.dc_scope) si::set_config_value(cfg, "dc_scope", *o.dc_scope);
  if (o.model) cfg.model = *o.model;
  if (o.luma) cfg.luma = true;
  cfg.validate();
  if (cfg.jobs > 0) omp_set_num_threads(cfg.jobs);
  return cfg;
}

std::unique_ptr<si::EmbeddingProvider> make_provider(const si::PipelineConfig& cfg) {
  if (cfg.model.empty()) return std::make_unique<si::BaselineEmbedder>();
#ifdef SMARTINSPECT_HAVE_ONNX
  return std::make_unique<si::ModelEmbedder>(cfg.model);
#else
  throw si::ConfigError("this build has no model runtime; --model is unavailable");
#endif
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw si::IoError("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Glass surface defect inspection"};
  app.require_subcommand(1);
  app.fallthrough();

  Overrides o;
  app.add_option("--config", o.config_path, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "base seed");
  app.add_option("--jobs", o.jobs, "worker threads (0: all cores)");
  app.add_option("--k", o.k, "clusters per filter round");
  app.add_option("--keep", o.keep, "clusters kept per round");
  app.add_option("--drop-threshold", o.drop_threshold, "stop once a round drops fewer points (0: 1%)");
  app.add_flag("--strict-drop", o.strict_drop, "drop labeled defects with their cluster");
  app.add_option("--dc-scope", o.dc_scope, "all | defects-only");
  app.add_option("--model", o.model, "ONNX embedding network (default: baseline descriptor)");
  app.add_flag("--luma", o.luma, "convert colour input to luminance");
  app.add_option("--set", o.sets, "override any config key: key=value");

  // propose
  auto* propose = app.add_subcommand("propose", "stage I: region proposals and crops");
  std::vector<fs::path> propose_inputs;
  fs::path propose_out;
  propose->add_option("images", propose_inputs, "images or directories")->required();
  propose->add_option("--out", propose_out, "output directory")->required();

  // train
  auto* train = app.add_subcommand("train", "embed crops, filter clusters, train BD and DC models");
  fs::path train_crops, train_labels, train_out, train_cache;
  train->add_option("--crops", train_crops, "directory of crop PNGs")->required();
  train->add_option("--labels", train_labels, "CSV crop_id,class_name")->required();
  train->add_option("--out", train_out, "model directory")->required();
  train->add_option("--cache", train_cache, "embedding cache directory");

  // inspect
  auto* insp = app.add_subcommand("inspect", "classify the regions of images");
  std::vector<fs::path> inspect_inputs;
  fs::path inspect_models, inspect_out;
  bool inspect_render = false;
  insp->add_option("images", inspect_inputs, "images or directories")->required();
  insp->add_option("--models", inspect_models, "directory with bd.model and dc.model")->required();
  insp->add_option("--out", inspect_out, "report directory")->required();
  insp->add_flag("--render", inspect_render, "also write annotated PNGs");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  std::string synth_profile, synth_name;
  int synth_n = 0;
  fs::path synth_out;
  si::CorpusOptions synth_opts;
  synth->add_option("--profile", synth_profile, "clean | dust | scratch | pit_crack")->required();
  synth->add_option("--n", synth_n, "number of images")->required();
  synth->add_option("--out", synth_out, "corpus root")->required();
  synth->add_option("--name", synth_opts.name, "corpus name (default: profile)");
  synth->add_option("--width", synth_opts.width, "frame width");
  synth->add_option("--height", synth_opts.height, "frame height");

  // eval
  auto* eval = app.add_subcommand("eval", "match reports against ground truth");
  fs::path eval_reports, eval_truth, eval_out, eval_matrix;
  std::optional<double> eval_iou;
  eval->add_option("--reports", eval_reports, "report directory")->required();
  eval->add_option("--truth", eval_truth, "truth directory (searched recursively)")->required();
  eval->add_option("--iou", eval_iou, "match threshold");
  eval->add_option("--out", eval_out, "CSV table (default: stdout)");
  eval->add_option("--matrix", eval_matrix, "per-class confusion matrix CSV");

  // label
  auto* label = app.add_subcommand("label", "draw a demo label file from synthetic ground truth");
  fs::path label_proposals, label_truth, label_out;
  double label_min_iou = 0.5;
  label->add_option("--proposals", label_proposals, "proposals.txt from propose")->required();
  label->add_option("--truth", label_truth, "truth directory (searched recursively)")->required();
  label->add_option("--out", label_out, "label CSV")->required();
  label->add_option("--min-iou", label_min_iou, "minimum IoU with a truth box");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    const si::PipelineConfig cfg = build_config(o);

    if (*propose) {
      const auto images = si::collect_images(propose_inputs);
      const si::ProposeSummary s = si::run_propose(images, propose_out, cfg);
      for (const std::string& e : s.errors) std::cerr << "error: " << e << '\n';
      std::cerr << s.images << " image(s), " << s.regions << " region(s)\n";
      return s.errors.empty() ? kOk : kIo;
    }
    if (*train) {
      const auto provider = make_provider(cfg);
      std::optional<fs::path> cache;
      if (!train_cache.empty()) cache = train_cache;
      const si::TrainedModels m = si::run_train(train_crops, train_labels, train_out, cfg, *provider, cache);
      std::cerr << "filter: " << m.trace.rounds.size() << " round(s), " << m.trace.retained.size() << " retained, "
                << m.trace.dropped.size() << " dropped (" << m.trace.stop_reason << ")\n";
      return kOk;
    }
    if (*insp) {
      const auto provider = make_provider(cfg);
      const si::ForestModel bd = si::load_model(inspect_models / "bd.model");
      const si::ForestModel dc = si::load_model(inspect_models / "dc.model");
      si::check_models(bd, dc, *provider);
      const auto images = si::collect_images(inspect_inputs);
      si::run_inspect(images, bd, dc, *provider, cfg, inspect_out, inspect_render);
      return kOk;
    }
    if (*synth) {
      const si::Profile profile = si::parse_profile(synth_profile);
      const fs::path dir = si::generate_corpus(synth_n, profile, cfg.seed, synth_out, synth_opts);
      std::cerr << "wrote " << dir.string() << '\n';
      return kOk;
    }
    if (*eval) {
      const si::EvalSummary s = si::run_eval(eval_reports, eval_truth, eval_iou.value_or(cfg.iou));
      if (eval_out.empty()) {
        si::write_table_csv(std::cout, s.rows);
      } else {
        auto out = open_out(eval_out);
        si::write_table_csv(out, s.rows);
      }
      if (!eval_matrix.empty()) {
        auto out = open_out(eval_matrix);
        si::write_matrix_csv(out, s.matrix);
      }
      return kOk;
    }
    if (*label) {
      const std::vector<si::Region> regions = si::read_proposals_file(label_proposals);
      const auto truth = si::read_truth_dir(label_truth);
      std::vector<std::string> ids;
      std::map<std::string, std::size_t> per_source;
      for (const si::Region& r : regions) ids.push_back(si::crop_id(r.source_id, per_source[r.source_id]++));
      const auto classes = si::label_from_truth(regions, truth, label_min_iou);
      const si::LabelSet labels = si::select_labels(ids, classes, si::kDemoLabelCounts, cfg.seed);
      if (label_out.has_parent_path()) fs::create_directories(label_out.parent_path());
      si::write_labels_csv(label_out, labels);
      return kOk;
    }
  } catch (const si::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const si::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const si::ContractViolation& e) {
    std::cerr << "contract violation: " << e.what() << '\n';
    return kContract;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kContract;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
