#include <set>

#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"
#include "smartinspect/errors.hpp"
#include "smartinspect/proposals.hpp"
#include "smartinspect/synth.hpp"
#include "support.hpp"

using namespace smartinspect;

namespace {

GlassSpec small_spec() {
  GlassSpec s;
  s.width = 200;
  s.height = 120;
  s.seed = 3;
  return s;
}

}  // namespace

TEST_CASE("an empty noiseless spec renders a uniform frame without proposals") {
  GlassSpec s = small_spec();
  s.noise_sigma = 0.0;
  const auto r = generate(s);
  CHECK(r.truth.entries.empty());
  CHECK(std::all_of(r.image.data().begin(), r.image.data().end(), [](auto v) { return v == 20; }));
  CHECK(propose(r.image, StageOneParams{}).empty());
}

TEST_CASE("generate is deterministic") {
  const auto spec = random_spec(Profile::PitCrack, 320, 240, 17);
  CHECK(generate(spec).image.data() == generate(spec).image.data());
  CHECK(random_spec(Profile::Dust, 320, 240, 5).primitives.size() ==
        random_spec(Profile::Dust, 320, 240, 5).primitives.size());
}

TEST_CASE("three scratches and two pits give exactly those truths, tight") {
  GlassSpec s = small_spec();
  s.noise_sigma = 0.0;
  s.primitives.push_back(ScratchSpec{{{20, 20}, {50, 30}}, 1.0, 180.0, 2.2});
  s.primitives.push_back(ScratchSpec{{{20, 80}, {40, 100}}, 2.0, 180.0, 2.2});
  s.primitives.push_back(ScratchSpec{{{80, 20}, {110, 20}, {120, 40}}, 1.5, 200.0, 2.2});
  s.primitives.push_back(PitSpec{{150, 40}, 3.0, 180.0, 2.0});
  s.primitives.push_back(PitSpec{{160, 90}, 5.0, 180.0, 2.0});
  const auto r = generate(s);
  REQUIRE(r.truth.entries.size() == 5);
  int scratches = 0, pits = 0;
  for (const auto& e : r.truth.entries) {
    scratches += e.cls == RegionClass::Scratch;
    pits += e.cls == RegionClass::Pit;
    // tight: every border row and column holds a raised pixel, nothing
    // outside the box is raised (primitives here are far apart)
    auto raised = [&](int x, int y) { return r.image.at(x, y) > 20; };
    bool top = false, bottom = false, left = false, right = false;
    for (int x = e.bbox.x0; x < e.bbox.x1(); ++x) {
      top = top || raised(x, e.bbox.y0);
      bottom = bottom || raised(x, e.bbox.y1() - 1);
    }
    for (int y = e.bbox.y0; y < e.bbox.y1(); ++y) {
      left = left || raised(e.bbox.x0, y);
      right = right || raised(e.bbox.x1() - 1, y);
    }
    CHECK((top && bottom && left && right));
  }
  for (int y = 0; y < r.image.height(); ++y) {
    for (int x = 0; x < r.image.width(); ++x) {
      if (r.image.at(x, y) == 20) continue;
      CHECK(std::any_of(r.truth.entries.begin(), r.truth.entries.end(),
                        [&](const TruthEntry& e) { return e.bbox.contains(x, y); }));
    }
  }
  CHECK(scratches == 3);
  CHECK(pits == 2);
}

TEST_CASE("invalid primitives are rejected by index") {
  GlassSpec s = small_spec();
  s.primitives.push_back(PitSpec{{50, 50}, 3.0, 180.0, 2.0});
  s.primitives.push_back(PitSpec{{198, 50}, 3.0, 180.0, 2.0});
  CHECK_THROWS_WITH_AS(generate(s), doctest::Contains("primitive 1"), std::invalid_argument);

  s.primitives = {PitSpec{{50, 50}, 9.0, 180.0, 2.0}};
  CHECK_THROWS_WITH_AS(generate(s), doctest::Contains("primitive 0"), std::invalid_argument);
  s.primitives = {PitSpec{{50, 50}, 3.0, 24.0, 2.0}};  // not above background + 5 sigma
  CHECK_THROWS_AS(generate(s), std::invalid_argument);
  s.primitives = {ScratchSpec{{{10, 10}}, 1.0, 180.0, 2.0}};
  CHECK_THROWS_AS(generate(s), std::invalid_argument);
}

TEST_CASE("profile names") {
  for (auto p : {Profile::Clean, Profile::Dust, Profile::Scratch, Profile::PitCrack}) {
    CHECK(parse_profile(profile_name(p)) == p);
  }
  CHECK_THROWS_AS(parse_profile("foggy"), std::invalid_argument);
}

TEST_CASE("profiles draw from their documented class mix") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (auto p : {Profile::Clean, Profile::Dust, Profile::Scratch, Profile::PitCrack}) {
      std::array<int, kRegionClassCount> n{};
      for (const auto& prim : random_spec(p, 768, 512, seed).primitives) ++n[wire_index(primitive_class(prim))];
      const int dust = n[wire_index(RegionClass::Dust)];
      const int sparse = n[0] + n[1] + n[2];
      CHECK(n[wire_index(RegionClass::SensorRegion)] <= 2);
      CHECK(n[wire_index(RegionClass::LightReflection)] <= 2);
      switch (p) {
        case Profile::Clean:
          CHECK(dust <= 4);
          CHECK(sparse <= 2);
          break;
        case Profile::Dust:
          CHECK(dust >= 6);  // a crowded frame can leave a few out
          CHECK(dust <= 14);
          CHECK(sparse <= 3);
          break;
        case Profile::Scratch:
          CHECK(n[1] + n[2] == 0);
          CHECK(n[0] <= 4);
          break;
        case Profile::PitCrack:
          CHECK(n[0] == 0);
          CHECK(n[1] <= 2);
          CHECK(n[2] <= 4);
          break;
      }
    }
  }
}

TEST_CASE("every truth box is found by stage I with IoU >= 0.5") {
  std::size_t images = 0, boxes = 0;
  for (auto p : {Profile::Clean, Profile::Dust, Profile::Scratch, Profile::PitCrack}) {
    for (const auto& item : make_corpus(p, 13, 99)) {
      ++images;
      const auto regions = propose(item.rendered.image, StageOneParams{});
      for (const auto& e : item.rendered.truth.entries) {
        ++boxes;
        double best = 0.0;
        for (const auto& r : regions) best = std::max(best, oracle::box_iou(r.bbox, e.bbox));
        INFO(item.id << " " << class_name(e.cls) << " at " << e.bbox.x0 << "," << e.bbox.y0);
        CHECK(best >= 0.5);
      }
    }
  }
  CHECK(images >= 50);
  CHECK(boxes > images * 4);
}

TEST_CASE("truth boxes stay clear of the frame border") {
  for (auto p : {Profile::Clean, Profile::Dust, Profile::Scratch, Profile::PitCrack}) {
    for (const auto& item : make_corpus(p, 8, 5, 400, 300)) {
      for (const auto& e : item.rendered.truth.entries) {
        CHECK(e.bbox.x0 >= 1);
        CHECK(e.bbox.y0 >= 1);
        CHECK(e.bbox.x1() <= 399);
        CHECK(e.bbox.y1() <= 299);
      }
    }
  }
}

TEST_CASE("corpus files, manifest and hashes") {
  testing::TempDir dir("synth");
  const auto root = generate_corpus(6, Profile::Scratch, 42, dir.path(), {"", 320, 200});
  CHECK(root == dir.path() / "scratch");
  const auto manifest = nlohmann::json::parse(testing::slurp(root / "manifest.json"));
  REQUIRE(manifest.at("items").size() == 6);
  std::set<std::string> hashes;
  for (const auto& item : manifest.at("items")) {
    const std::string id = item.at("id");
    CHECK(std::filesystem::exists(root / "images" / (id + ".png")));
    CHECK(std::filesystem::exists(root / "truth" / (id + ".json")));
    hashes.insert(item.at("image_sha256").get<std::string>());
  }
  CHECK(hashes.size() == 6);

  testing::TempDir again("synth");
  generate_corpus(6, Profile::Scratch, 42, again.path(), {"", 320, 200});
  CHECK(testing::slurp(again / "scratch/manifest.json") == testing::slurp(root / "manifest.json"));

  CHECK_THROWS_AS(generate_corpus(0, Profile::Clean, 1, dir.path()), std::invalid_argument);
}

TEST_CASE("truth JSON round-trips and rejects bad classes") {
  GroundTruth t;
  t.entries = {{{1, 2, 3, 4}, RegionClass::Crack}, {{5, 6, 7, 8}, RegionClass::LightReflection}};
  const auto [back, profile] = truth_from_json(truth_to_json(t, "x_0", "pit_crack"));
  CHECK(profile == "pit_crack");
  REQUIRE(back.entries.size() == 2);
  CHECK(back.entries[1].bbox == BBox{5, 6, 7, 8});
  CHECK(back.entries[1].cls == RegionClass::LightReflection);
  CHECK_THROWS_AS(truth_from_json(R"({"entries":[{"bbox":[1,2,3,4],"class":"smudge"}]})"), IoError);
  CHECK_THROWS_AS(truth_from_json(R"({"entries":[{"bbox":[1,2,3],"class":"pit"}]})"), IoError);
}
