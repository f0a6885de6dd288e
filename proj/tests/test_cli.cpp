#include <sys/wait.h>

#include <cstdlib>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "smartinspect/classify.hpp"
#include "smartinspect/image_io.hpp"
#include "support.hpp"

namespace {

const std::string kCli = SI_CLI_PATH;

int run(const std::string& args) {
  const int status = std::system((kCli + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("cli: synth writes the requested pairs") {
  testing::TempDir dir("cli");
  REQUIRE(run("synth --profile clean --n 2 --seed 4 --width 320 --height 240 --out " + (dir / "c").string()) == 0);
  CHECK(std::filesystem::exists(dir / "c/clean/images/clean_0000.png"));
  CHECK(std::filesystem::exists(dir / "c/clean/images/clean_0001.png"));
  CHECK(std::filesystem::exists(dir / "c/clean/truth/clean_0001.json"));
  CHECK_FALSE(std::filesystem::exists(dir / "c/clean/images/clean_0002.png"));
  CHECK(nlohmann::json::parse(testing::slurp(dir / "c/clean/manifest.json")).at("items").size() == 2);
}

TEST_CASE("cli: exit codes") {
  testing::TempDir dir("cli");
  CHECK(run("--help") == 0);
  CHECK(run("synth --profile foggy --n 1 --out " + dir.path().string()) == 4);
  CHECK(run("synth --profile clean --n 0 --out " + dir.path().string()) == 4);
  CHECK(run("frobnicate") == 2);

  testing::spit(dir / "bad.toml", "k = 3\nnonsense = 1\n");
  CHECK(run("--config " + (dir / "bad.toml").string() + " synth --profile clean --n 1 --out " +
            dir.path().string()) == 2);
  testing::spit(dir / "range.toml", "keep = 50\n");
  CHECK(run("--config " + (dir / "range.toml").string() + " propose " + dir.path().string() + " --out " +
            (dir / "p").string()) == 2);

  std::filesystem::create_directories(dir / "empty_r");
  std::filesystem::create_directories(dir / "empty_t");
  CHECK(run("eval --reports " + (dir / "empty_r").string() + " --truth " + (dir / "empty_t").string()) == 3);
  CHECK(run("propose " + (dir / "nowhere").string() + " --out " + (dir / "p").string()) == 3);

  // models of the wrong dimension for the embedder
  smartinspect::ForestModel bd, dc;
  bd.class_count = 2;
  dc.class_count = 6;
  bd.dim = dc.dim = 7;
  smartinspect::DecisionTree leaf2, leaf6;
  leaf2.nodes.push_back({-1, 0.0, -1, -1, {1, 0}, 0});
  leaf6.nodes.push_back({-1, 0.0, -1, -1, {1, 0, 0, 0, 0, 0}, 0});
  bd.trees = {leaf2};
  dc.trees = {leaf6};
  std::filesystem::create_directories(dir / "m");
  smartinspect::save_model(bd, dir / "m/bd.model");
  smartinspect::save_model(dc, dir / "m/dc.model");
  smartinspect::write_png(dir / "img.png", smartinspect::GrayImage(32, 32));
  CHECK(run("inspect " + (dir / "img.png").string() + " --models " + (dir / "m").string() + " --out " +
            (dir / "r").string()) == 4);
}

TEST_CASE("cli: end-to-end run emits one row per profile") {
  testing::TempDir dir("cli-e2e");
  const std::string d = dir.path().string();
  for (const char* p : {"clean", "dust", "scratch", "pit_crack"}) {
    REQUIRE(run(std::string("synth --profile ") + p + " --n 4 --seed 7 --out " + d + "/corpus") == 0);
    REQUIRE(run(std::string("synth --profile ") + p + " --n 2 --seed 1001 --out " + d + "/held") == 0);
  }
  REQUIRE(run("propose " + d + "/corpus/clean/images " + d + "/corpus/dust/images " + d + "/corpus/scratch/images " +
              d + "/corpus/pit_crack/images --out " + d + "/prop") == 0);
  // the bundled labels need a full demo corpus; label the crops directly
  const auto regions = smartinspect::read_proposals_file(dir / "prop/proposals.txt");
  std::map<std::string, std::size_t> per_source;
  std::string csv = "crop_id,class_name\n";
  for (std::size_t i = 0; i < regions.size() && i < 12; ++i) {
    const auto id = smartinspect::crop_id(regions[i].source_id, per_source[regions[i].source_id]++);
    csv += id + (i % 2 == 0 ? ",scratch\n" : ",dust\n");
  }
  testing::spit(dir / "labels.csv", csv);
  REQUIRE(run("train --crops " + d + "/prop/crops --labels " + d + "/labels.csv --out " + d + "/models") == 0);
  REQUIRE(run("inspect " + d + "/held/clean/images " + d + "/held/dust/images " + d + "/held/scratch/images " + d +
              "/held/pit_crack/images --models " + d + "/models --out " + d + "/reports --render") == 0);
  CHECK(std::filesystem::exists(dir / "reports/scratch_0000.png"));
  REQUIRE(run("eval --reports " + d + "/reports --truth " + d + "/held --out " + d + "/table.csv --matrix " + d +
              "/matrix.csv") == 0);
  const std::string table = testing::slurp(dir / "table.csv");
  std::vector<std::string> first_fields;
  std::istringstream lines(table);
  for (std::string line; std::getline(lines, line);) first_fields.push_back(line.substr(0, line.find(',')));
  CHECK(first_fields == std::vector<std::string>{"sample", "clean", "dust", "scratch", "pit_crack"});
  CHECK(testing::slurp(dir / "matrix.csv").rfind("truth\\predicted,scratch", 0) == 0);
}
