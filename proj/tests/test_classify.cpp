#include <numeric>

#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"
#include "smartinspect/classify.hpp"
#include "smartinspect/errors.hpp"
#include "smartinspect/pipeline.hpp"
#include "smartinspect/semisup.hpp"
#include "support.hpp"

using namespace smartinspect;

namespace {

const std::filesystem::path kDemo = SI_DEMO_DIR;

ForestParams small_forest() {
  ForestParams p;
  p.trees = 15;
  return p;
}

// A forest over the baseline dimension whose every tree is one leaf.
ForestModel constant_model(std::size_t classes, std::size_t label, std::size_t dim = kDefaultFeatureDim) {
  ForestModel m;
  m.class_count = classes;
  m.dim = dim;
  DecisionTree t;
  TreeNode leaf;
  leaf.counts.assign(classes, 0);
  leaf.counts[label] = 1;
  leaf.label = static_cast<std::uint32_t>(label);
  t.nodes.push_back(leaf);
  m.trees.push_back(t);
  return m;
}

GrayImage frame_with_squares() {
  GrayImage img(160, 100, 10);
  for (int y = 20; y < 30; ++y) {
    for (int x = 20; x < 35; ++x) img.at(x, y) = 230;
  }
  for (int y = 60; y < 70; ++y) {
    for (int x = 100; x < 108; ++x) img.at(x, y) = 230;
  }
  return img;
}

}  // namespace

TEST_CASE("binary projection and report colours over all six classes") {
  const std::array<Verdict, 6> verdict = {Verdict::Defect,     Verdict::Defect,     Verdict::Defect,
                                          Verdict::Background, Verdict::Background, Verdict::Background};
  const std::array<Rgb, 6> colour = {Rgb{255, 0, 0},   Rgb{0, 255, 0},   Rgb{0, 255, 0},
                                     Rgb{255, 255, 0}, Rgb{128, 0, 128}, Rgb{255, 255, 0}};
  const std::array<std::string_view, 6> names = {"scratch", "pit", "crack", "dust", "sensor_region",
                                                 "light_reflection"};
  for (std::size_t i = 0; i < 6; ++i) {
    const RegionClass c = kAllRegionClasses[i];
    CHECK(wire_index(c) == i);
    CHECK(project(c) == verdict[i]);
    CHECK(class_color(c) == colour[i]);
    CHECK(class_name(c) == names[i]);
    CHECK(parse_class(names[i]) == c);
    CHECK(class_from_index(i) == c);
  }
  CHECK_FALSE(parse_class("smudge").has_value());
  CHECK_FALSE(class_from_index(6).has_value());
}

TEST_CASE("label CSV round trip and errors") {
  testing::TempDir dir("labels");
  LabelSet s;
  s.entries = {{"a_0", RegionClass::Pit}, {"b_3", RegionClass::SensorRegion}};
  write_labels_csv(dir / "l.csv", s);
  CHECK(read_labels_csv(dir / "l.csv").entries == s.entries);

  testing::spit(dir / "nohdr.csv", "a_0,pit\nb_1,dust\n");
  CHECK(read_labels_csv(dir / "nohdr.csv").entries.size() == 2);
  testing::spit(dir / "bad.csv", "crop_id,class_name\na_0,pit\nb_1,smudge\n");
  CHECK_THROWS_WITH_AS(read_labels_csv(dir / "bad.csv"), doctest::Contains(":3:"), IoError);
  testing::spit(dir / "dup.csv", "a_0,pit\na_0,dust\n");
  CHECK_THROWS_WITH_AS(read_labels_csv(dir / "dup.csv"), doctest::Contains("duplicate"), IoError);
  testing::spit(dir / "shape.csv", "a_0\n");
  CHECK_THROWS_AS(read_labels_csv(dir / "shape.csv"), IoError);
  CHECK_THROWS_AS(read_labels_csv(dir / "none.csv"), IoError);
}

TEST_CASE("the bundled demo labels carry the documented class counts") {
  const auto labels = read_labels_csv(kDemo / "labels.csv");
  CHECK(class_counts(labels) == kDemoLabelCounts);
  CHECK(std::accumulate(kDemoLabelCounts.begin(), kDemoLabelCounts.end(), std::size_t{0}) == 107);
}

TEST_CASE("BD fits pseudo labels from a cluster filter on separable blobs") {
  const auto b = oracle::two_blobs(2);
  FilterParams fp;
  fp.drop_threshold = 5;
  const auto trace = cluster_filter(b.points, b.labels, fp);
  const auto pseudo = pseudo_labels(trace, b.labels);
  const auto bd = train_bd(b.points, pseudo, small_forest());
  CHECK(bd.tag == "BD");
  CHECK(bd.class_count == 2);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < b.points.size(); ++i) ok += predict(bd, b.points[i]).label == static_cast<std::size_t>(pseudo[i]);
  CHECK(static_cast<double>(ok) / static_cast<double>(b.points.size()) >= 0.99);
}

TEST_CASE("BD and DC argument errors") {
  const std::vector<FeatureVector> f = {{0.0}, {1.0}};
  const std::vector<Verdict> same = {Verdict::Defect, Verdict::Defect};
  CHECK_THROWS_AS(train_bd(f, same, small_forest()), std::invalid_argument);
  const std::vector<Verdict> short_labels = {Verdict::Defect};
  CHECK_THROWS_AS(train_bd(f, short_labels, small_forest()), std::invalid_argument);

  const std::vector<std::string> ids = {"a", "b"};
  LabelSet one;
  one.entries = {{"a", RegionClass::Pit}, {"b", RegionClass::Pit}};
  CHECK_THROWS_AS(train_dc(one, ids, f, small_forest()), std::invalid_argument);
  LabelSet missing;
  missing.entries = {{"a", RegionClass::Pit}, {"zzz", RegionClass::Dust}};
  CHECK_THROWS_AS(train_dc(missing, ids, f, small_forest()), std::invalid_argument);
  LabelSet pseudo;
  pseudo.entries = {{"a", RegionClass::Pit}, {"b", RegionClass::Dust}};
  pseudo.provenance = Provenance::Pseudo;
  CHECK_THROWS_AS(train_dc(pseudo, ids, f, small_forest()), std::invalid_argument);
  CHECK_THROWS_AS(train_dc(LabelSet{}, ids, f, small_forest()), std::invalid_argument);
}

TEST_CASE("DC separates six well-separated clusters on held-out points") {
  // centroids 10 apart per axis (pairwise distance 14.1), points within a
  // radius of 1.41: separation is 10x the cluster radius
  constexpr std::size_t dim = 8, per_class = 50;
  Rng rng(77);
  std::vector<std::string> ids;
  std::vector<FeatureVector> features;
  std::vector<RegionClass> truth;
  for (std::size_t c = 0; c < 6; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      FeatureVector v(dim);
      for (std::size_t d = 0; d < dim; ++d) v[d] = rng.uniform(-0.5, 0.5) + (d == c ? 10.0 : 0.0);
      ids.push_back("c" + std::to_string(c) + "_" + std::to_string(i));
      features.push_back(std::move(v));
      truth.push_back(kAllRegionClasses[c]);
    }
  }
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.index(i + 1)]);
  const std::size_t split = order.size() * 4 / 5;
  LabelSet train;
  for (std::size_t k = 0; k < split; ++k) train.entries[ids[order[k]]] = truth[order[k]];
  const auto dc = train_dc(train, ids, features, small_forest());
  CHECK(dc.tag == "DC");
  std::size_t ok = 0;
  for (std::size_t k = split; k < order.size(); ++k) {
    ok += predict(dc, features[order[k]]).label == wire_index(truth[order[k]]);
  }
  CHECK(static_cast<double>(ok) / static_cast<double>(order.size() - split) >= 0.95);
}

TEST_CASE("inspect: model checks, scopes and report invariants") {
  BaselineEmbedder provider;
  const auto bd = constant_model(2, 1);
  const auto dc = constant_model(6, wire_index(RegionClass::Crack));
  InspectConfig cfg;

  CHECK(inspect(GrayImage(64, 64, 10), bd, dc, provider, cfg, "blank").findings.empty());
  CHECK_THROWS_AS(inspect(GrayImage(8, 8), constant_model(2, 0, 9), dc, provider, cfg, "x"), ContractViolation);
  CHECK_THROWS_AS(inspect(GrayImage(8, 8), bd, constant_model(5, 0), provider, cfg, "x"), ContractViolation);
  CHECK_THROWS_AS(inspect(GrayImage(8, 8), dc, bd, provider, cfg, "x"), ContractViolation);

  const GrayImage img = frame_with_squares();
  const auto report = inspect(img, bd, dc, provider, cfg, "sq");
  const auto proposals = propose(img, cfg.stage_one, "sq");
  REQUIRE(report.findings.size() == proposals.size());
  CHECK(report.findings.size() == 2);
  for (std::size_t i = 0; i < report.findings.size(); ++i) {
    CHECK(report.findings[i].region.bbox == proposals[i].bbox);
    CHECK(report.findings[i].cls == RegionClass::Crack);
    CHECK(report.findings[i].verdict == Verdict::Defect);
  }
  CHECK(report_to_json(inspect(img, bd, dc, provider, cfg, "sq")) == report_to_json(report));

  cfg.dc_scope = DcScope::DefectsOnly;
  CHECK(inspect(img, constant_model(2, 0), dc, provider, cfg, "sq").findings.empty());
  CHECK(inspect(img, bd, dc, provider, cfg, "sq").findings.size() == 2);
}

TEST_CASE("report JSON round trip and rendering") {
  InspectionReport r;
  r.source_id = "img_1";
  Finding f;
  f.region.bbox = {5, 6, 10, 4};
  f.region.score = 40;
  f.cls = RegionClass::SensorRegion;
  f.verdict = Verdict::Background;
  f.votes = {0, 0, 0.25, 0, 0.75, 0};
  r.findings.push_back(f);
  const auto j = nlohmann::json::parse(report_to_json(r));
  CHECK(j.at("findings")[0].at("color") == "purple");
  const auto back = report_from_json(report_to_json(r));
  CHECK(back.source_id == "img_1");
  REQUIRE(back.findings.size() == 1);
  CHECK(back.findings[0].region.bbox == f.region.bbox);
  CHECK(back.findings[0].cls == f.cls);
  CHECK(back.findings[0].verdict == f.verdict);
  CHECK(back.findings[0].votes == f.votes);
  CHECK_THROWS_AS(report_from_json("{"), IoError);
  CHECK_THROWS_AS(report_from_json(R"({"source_id":"a","findings":[{"bbox":[1,2,3,4],"class":"pit","verdict":"maybe"}]})"),
                  IoError);

  const GrayImage img(30, 20, 50);
  const RgbImage out = render_report(img, r);
  auto px = [&](int x, int y) {
    const std::size_t i = (static_cast<std::size_t>(y) * out.width + x) * 3;
    return Rgb{out.data[i], out.data[i + 1], out.data[i + 2]};
  };
  CHECK(px(4, 5) == Rgb{128, 0, 128});    // top-left corner, one pixel outside
  CHECK(px(15, 10) == Rgb{128, 0, 128});  // bottom-right corner
  CHECK(px(8, 7) == Rgb{50, 50, 50});     // inside untouched
  CHECK(px(0, 0) == Rgb{50, 50, 50});
}
