#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"
#include "smartinspect/errors.hpp"
#include "smartinspect/forest.hpp"
#include "support.hpp"

using namespace smartinspect;

namespace {

ForestParams exact(int trees = 1) {
  ForestParams p;
  p.trees = trees;
  p.max_depth = 0;
  p.min_leaf = 1;
  p.features_per_split = 0;
  p.bootstrap = false;
  return p;
}

std::vector<TrainSample> xor_samples() {
  return {{{0.0, 0.0}, 0}, {{0.0, 1.0}, 1}, {{1.0, 0.0}, 1}, {{1.0, 1.0}, 0}};
}

double accuracy(const ForestModel& m, const std::vector<TrainSample>& s) {
  std::size_t ok = 0;
  for (const auto& x : s) ok += predict(m, x.features).label == x.label;
  return static_cast<double>(ok) / static_cast<double>(s.size());
}

}  // namespace

TEST_CASE("gini impurity") {
  const std::vector<std::uint32_t> pure = {0, 5, 0};
  const std::vector<std::uint32_t> even = {2, 2};
  CHECK(gini(pure) == 0.0);
  CHECK(gini(even) == doctest::Approx(0.5));
}

TEST_CASE("single-class training gives a constant predictor") {
  std::vector<TrainSample> s = {{{1.0, 2.0}, 2}, {{3.0, -1.0}, 2}, {{0.0, 0.0}, 2}};
  const auto m = train_forest(s, 3, ForestParams{});
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    const auto p = predict(m, std::vector<double>{rng.uniform(-9, 9), rng.uniform(-9, 9)});
    CHECK(p.label == 2);
    CHECK(p.votes[2] == 1.0);
  }
}

TEST_CASE("XOR is learned exactly by one unbagged tree") {
  const auto s = xor_samples();
  REQUIRE(oracle::two_split_tree_exists(s));
  const auto m = train_forest(s, 2, exact());
  CHECK(accuracy(m, s) == 1.0);
}

TEST_CASE("separable blobs are fit exactly with default parameters") {
  const auto s = oracle::labeled_blobs(3, 100, 2, 2, 4.0);
  REQUIRE(oracle::perceptron_separates(s));
  ForestParams p;
  p.trees = 25;
  const auto m = train_forest(s, 2, p);
  CHECK(accuracy(m, s) == 1.0);
}

TEST_CASE("exact settings reach training accuracy 1 on distinct vectors") {
  const auto s = oracle::labeled_blobs(4, 120, 3, 5, 0.3);  // heavily overlapping classes
  CHECK(accuracy(train_forest(s, 3, exact()), s) == 1.0);
}

TEST_CASE("vote ties go to the lowest class") {
  ForestModel m;
  m.class_count = 2;
  m.dim = 1;
  DecisionTree a, b;
  a.nodes.push_back({-1, 0.0, -1, -1, {0, 1}, 1});
  b.nodes.push_back({-1, 0.0, -1, -1, {1, 0}, 0});
  m.trees = {a, b};
  const auto p = predict(m, std::vector<double>{0.0});
  CHECK(p.label == 0);
  CHECK(p.votes == std::vector<double>{0.5, 0.5});
}

TEST_CASE("prediction agrees with a vote count over the serialized trees") {
  const auto s = oracle::labeled_blobs(5, 150, 3, 4, 1.0);
  ForestParams p;
  p.trees = 15;
  p.seed = 9;
  const auto m = train_forest(s, 3, p);
  const auto doc = nlohmann::json::parse(model_to_json(m));
  Rng rng(6);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> x(4);
    for (auto& v : x) v = rng.uniform(-2, 3);
    const auto pred = predict(m, x);
    CHECK(pred.label == oracle::vote_from_json(doc, x));
    double sum = 0;
    for (double v : pred.votes) sum += v;
    CHECK(sum == doctest::Approx(1.0));
  }
}

TEST_CASE("training is deterministic and thread-count independent") {
  const auto s = oracle::labeled_blobs(6, 80, 2, 6, 1.0);
  ForestParams p;
  p.trees = 12;
  p.seed = 3;
  const auto a = train_forest(s, 2, p);
  CHECK(model_to_json(a) == model_to_json(train_forest(s, 2, p)));
  CHECK(model_to_json(a) == model_to_json(serial::train_forest(s, 2, p)));
}

TEST_CASE("structural invariants of grown trees") {
  const auto s = oracle::labeled_blobs(7, 90, 3, 5, 0.8);
  ForestParams p;
  p.trees = 8;
  p.min_leaf = 3;
  p.max_depth = 5;
  const auto m = train_forest(s, 3, p);
  for (const auto& tree : m.trees) {
    for (const auto& n : tree.nodes) {
      if (n.is_leaf()) {
        std::uint32_t total = 0;
        for (auto c : n.counts) total += c;
        CHECK(total >= 3);
      } else {
        CHECK(n.feature < 5);
        // a split never raises weighted impurity
        auto hist = [&](int idx, auto&& self) -> std::vector<std::uint32_t> {
          const auto& node = tree.nodes[idx];
          if (node.is_leaf()) return node.counts;
          auto l = self(node.left, self), r = self(node.right, self);
          for (std::size_t c = 0; c < l.size(); ++c) l[c] += r[c];
          return l;
        };
        const auto parent = hist(static_cast<int>(&n - tree.nodes.data()), hist);
        const auto l = hist(n.left, hist), r = hist(n.right, hist);
        double nl = 0, nr = 0;
        for (auto c : l) nl += c;
        for (auto c : r) nr += c;
        CHECK((nl * gini(l) + nr * gini(r)) / (nl + nr) < gini(parent) + 1e-12);
      }
    }
  }
}

TEST_CASE("forest argument errors") {
  CHECK_THROWS_AS(train_forest({}, 2, ForestParams{}), std::invalid_argument);
  std::vector<TrainSample> mixed = {{{1.0}, 0}, {{1.0, 2.0}, 1}};
  CHECK_THROWS_AS(train_forest(mixed, 2, ForestParams{}), std::invalid_argument);
  std::vector<TrainSample> high = {{{1.0}, 5}};
  CHECK_THROWS_AS(train_forest(high, 2, ForestParams{}), std::invalid_argument);
  ForestParams bad;
  bad.trees = 0;
  CHECK_THROWS_AS(train_forest(xor_samples(), 2, bad), std::invalid_argument);
  const auto m = train_forest(xor_samples(), 2, exact());
  CHECK_THROWS_AS(predict(m, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("model files round-trip and reject damage") {
  testing::TempDir dir("forest");
  const auto s = oracle::labeled_blobs(8, 60, 3, 3, 1.5);
  ForestParams p;
  p.trees = 10;
  const auto m = train_forest(s, 3, p);
  save_model(m, dir / "m.model");
  const auto back = load_model(dir / "m.model");
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> x = {rng.uniform(-2, 3), rng.uniform(-2, 3), rng.uniform(-2, 3)};
    const auto a = predict(m, x), b = predict(back, x);
    CHECK(a.label == b.label);
    CHECK(a.votes == b.votes);
  }

  const std::string text = testing::slurp(dir / "m.model");
  testing::spit(dir / "trunc.model", text.substr(0, text.size() / 2));
  CHECK_THROWS_AS(load_model(dir / "trunc.model"), IoError);

  auto doc = nlohmann::json::parse(text);
  doc["version"] = 2;
  testing::spit(dir / "v2.model", doc.dump());
  CHECK_THROWS_WITH_AS(load_model(dir / "v2.model"), doctest::Contains("version"), IoError);

  doc = nlohmann::json::parse(text);
  doc.erase("dim");
  testing::spit(dir / "nodim.model", doc.dump());
  CHECK_THROWS_WITH_AS(load_model(dir / "nodim.model"), doctest::Contains("dim"), IoError);

  ForestModel empty = m;
  empty.trees.clear();
  CHECK_THROWS_AS(save_model(empty, dir / "e.model"), std::invalid_argument);
  CHECK_THROWS_AS(load_model(dir / "absent.model"), IoError);
}
