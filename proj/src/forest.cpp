#include "smartinspect/forest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "smartinspect/errors.hpp"
#include "smartinspect/random.hpp"

namespace smartinspect {

void ForestParams::validate() const {
  if (trees < 1) throw std::invalid_argument("forest: tree count must be >= 1");
  if (max_depth < 0) throw std::invalid_argument("forest: max depth must be >= 0 (0 = unbounded)");
  if (min_leaf < 1) throw std::invalid_argument("forest: min leaf size must be >= 1");
  if (features_per_split < 0) throw std::invalid_argument("forest: features per split must be >= 0");
}

double gini(std::span<const std::uint32_t> counts) {
  double n = 0.0;
  double sq = 0.0;
  for (auto c : counts) {
    n += c;
    sq += static_cast<double>(c) * c;
  }
  return n > 0 ? 1.0 - sq / (n * n) : 0.0;
}

const TreeNode& DecisionTree::leaf_for(std::span<const double> x) const {
  const TreeNode* node = &nodes[0];
  while (!node->is_leaf()) node = &nodes[x[node->feature] <= node->threshold ? node->left : node->right];
  return *node;
}

namespace {

using Wide = __int128;

// Split quality as the exact fraction (SL*nR + SR*nL) / (nL*nR), where S is
// the sum of squared class counts. Larger is purer; weighted Gini * n equals
// n - quality.
struct Quality {
  Wide num = 0;
  Wide den = 1;

  friend bool operator<(const Quality& a, const Quality& b) { return a.num * b.den < b.num * a.den; }
  friend bool operator==(const Quality& a, const Quality& b) { return a.num * b.den == b.num * a.den; }
};

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  Quality quality;
};

class TreeGrower {
 public:
  TreeGrower(std::span<const TrainSample> samples, std::size_t class_count, std::size_t dim, const ForestParams& p,
             std::size_t mtry, std::uint64_t seed)
      : samples_(samples), classes_(class_count), dim_(dim), params_(p), mtry_(mtry), rng_(seed) {}

  DecisionTree grow() {
    std::vector<std::size_t> idx;
    const std::size_t n = samples_.size();
    idx.reserve(n);
    if (params_.bootstrap) {
      for (std::size_t i = 0; i < n; ++i) idx.push_back(rng_.index(n));
    } else {
      for (std::size_t i = 0; i < n; ++i) idx.push_back(i);
    }
    tree_.nodes.emplace_back();
    build(0, idx, 0);
    return std::move(tree_);
  }

 private:
  std::vector<std::uint32_t> histogram(std::span<const std::size_t> idx) const {
    std::vector<std::uint32_t> counts(classes_, 0);
    for (std::size_t i : idx) ++counts[samples_[i].label];
    return counts;
  }

  void make_leaf(int node, std::vector<std::uint32_t> counts) {
    TreeNode& leaf = tree_.nodes[node];
    leaf.feature = -1;
    leaf.label = static_cast<std::uint32_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    leaf.counts = std::move(counts);
  }

  // Best threshold on one feature; returns false if the feature is constant here.
  bool scan_feature(int f, std::span<const std::size_t> idx, SplitChoice& best) {
    const std::size_t n = idx.size();
    order_.resize(n);
    for (std::size_t i = 0; i < n; ++i) order_[i] = {samples_[idx[i]].features[f], samples_[idx[i]].label};
    std::sort(order_.begin(), order_.end());
    if (order_.front().first == order_.back().first) return false;

    std::vector<std::uint32_t> left(classes_, 0);
    std::vector<std::uint32_t> right = histogram(idx);
    Wide sl = 0;
    Wide sr = 0;
    for (auto c : right) sr += static_cast<Wide>(c) * c;
    const std::size_t min_leaf = static_cast<std::size_t>(params_.min_leaf);

    for (std::size_t i = 0; i + 1 < n; ++i) {
      const std::size_t c = order_[i].second;
      // moving one sample of class c from right to left
      sl += 2 * static_cast<Wide>(left[c]) + 1;
      sr -= 2 * static_cast<Wide>(right[c]) - 1;
      ++left[c];
      --right[c];
      const double v = order_[i].first;
      const double next = order_[i + 1].first;
      if (v == next) continue;
      const std::size_t nl = i + 1;
      const std::size_t nr = n - nl;
      if (nl < min_leaf || nr < min_leaf) continue;
      Quality q{sl * static_cast<Wide>(nr) + sr * static_cast<Wide>(nl), static_cast<Wide>(nl) * nr};
      double thr = v + (next - v) / 2.0;
      if (!(thr >= v && thr < next)) thr = v;
      const bool better = !best.found || best.quality < q ||
                          (q == best.quality && (f < best.feature || (f == best.feature && thr < best.threshold)));
      if (better) best = {true, f, thr, q};
    }
    return true;
  }

  void build(int node, std::vector<std::size_t>& idx, int depth) {
    std::vector<std::uint32_t> counts = histogram(idx);
    const auto nonzero = std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; });
    const bool depth_reached = params_.max_depth > 0 && depth >= params_.max_depth;
    if (nonzero <= 1 || depth_reached || idx.size() < 2 * static_cast<std::size_t>(params_.min_leaf)) {
      make_leaf(node, std::move(counts));
      return;
    }

    // lazily shuffled feature order: draw until mtry non-constant features are scored
    features_.resize(dim_);
    std::iota(features_.begin(), features_.end(), 0);
    SplitChoice best;
    std::size_t scored = 0;
    for (std::size_t drawn = 0; drawn < dim_ && scored < mtry_; ++drawn) {
      const std::size_t j = drawn + rng_.index(dim_ - drawn);
      std::swap(features_[drawn], features_[j]);
      if (scan_feature(features_[drawn], idx, best)) ++scored;
    }
    if (!best.found) {
      make_leaf(node, std::move(counts));
      return;
    }

    std::vector<std::size_t> left_idx;
    std::vector<std::size_t> right_idx;
    for (std::size_t i : idx) {
      (samples_[i].features[best.feature] <= best.threshold ? left_idx : right_idx).push_back(i);
    }
    idx.clear();
    idx.shrink_to_fit();

    const int left = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    const int right = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    tree_.nodes[node].feature = best.feature;
    tree_.nodes[node].threshold = best.threshold;
    tree_.nodes[node].left = left;
    tree_.nodes[node].right = right;
    build(left, left_idx, depth + 1);
    build(right, right_idx, depth + 1);
  }

  std::span<const TrainSample> samples_;
  std::size_t classes_;
  std::size_t dim_;
  const ForestParams& params_;
  std::size_t mtry_;
  Rng rng_;
  DecisionTree tree_;
  std::vector<std::pair<double, std::size_t>> order_;
  std::vector<int> features_;
};

ForestModel prepare(std::span<const TrainSample> samples, std::size_t class_count, const ForestParams& params) {
  params.validate();
  if (samples.empty()) throw std::invalid_argument("forest: empty sample set");
  if (class_count < 1) throw std::invalid_argument("forest: class count must be >= 1");
  const std::size_t dim = samples[0].features.size();
  if (dim == 0) throw std::invalid_argument("forest: zero-dimensional features");
  for (const auto& s : samples) {
    if (s.features.size() != dim) throw std::invalid_argument("forest: inconsistent feature dimensions");
    if (s.label >= class_count) {
      throw std::invalid_argument("forest: label " + std::to_string(s.label) + " >= class count " +
                                  std::to_string(class_count));
    }
  }
  ForestModel model;
  model.class_count = class_count;
  model.dim = dim;
  model.params = params;
  model.trees.resize(static_cast<std::size_t>(params.trees));
  return model;
}

std::size_t features_per_split(const ForestParams& p, std::size_t dim) {
  if (p.features_per_split > 0) return std::min<std::size_t>(static_cast<std::size_t>(p.features_per_split), dim);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(dim)))));
}

}  // namespace

ForestModel train_forest(std::span<const TrainSample> samples, std::size_t class_count, const ForestParams& params) {
  ForestModel model = prepare(samples, class_count, params);
  const std::size_t mtry = features_per_split(params, model.dim);
  const int trees = params.trees;
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < trees; ++t) {
    TreeGrower grower(samples, class_count, model.dim, params, mtry, params.seed + static_cast<std::uint64_t>(t));
    model.trees[t] = grower.grow();
  }
  return model;
}

namespace serial {

ForestModel train_forest(std::span<const TrainSample> samples, std::size_t class_count, const ForestParams& params) {
  ForestModel model = prepare(samples, class_count, params);
  const std::size_t mtry = features_per_split(params, model.dim);
  for (int t = 0; t < params.trees; ++t) {
    TreeGrower grower(samples, class_count, model.dim, params, mtry, params.seed + static_cast<std::uint64_t>(t));
    model.trees[t] = grower.grow();
  }
  return model;
}

}  // namespace serial

Prediction predict(const ForestModel& model, std::span<const double> x) {
  if (x.size() != model.dim) {
    throw std::invalid_argument("predict: feature dim " + std::to_string(x.size()) + " != model dim " +
                                std::to_string(model.dim));
  }
  std::vector<std::size_t> tally(model.class_count, 0);
  for (const DecisionTree& tree : model.trees) ++tally[tree.leaf_for(x).label];
  Prediction p;
  p.label = static_cast<std::size_t>(std::max_element(tally.begin(), tally.end()) - tally.begin());
  p.votes.resize(model.class_count);
  for (std::size_t c = 0; c < model.class_count; ++c) {
    p.votes[c] = static_cast<double>(tally[c]) / static_cast<double>(model.trees.size());
  }
  return p;
}

// --- serialization -------------------------------------------------------

namespace {

using nlohmann::json;

json node_to_json(const DecisionTree& tree, int index) {
  const TreeNode& n = tree.nodes[index];
  if (n.is_leaf()) return json{{"counts", n.counts}};
  return json{{"feature", n.feature},
              {"threshold", n.threshold},
              {"left", node_to_json(tree, n.left)},
              {"right", node_to_json(tree, n.right)}};
}

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  throw IoError("forest model: field '" + field + "' " + what);
}

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) field_error(where + key, "is missing");
  return j.at(key);
}

template <class T>
T require_as(const json& j, const char* key, const std::string& where) {
  const json& v = require(j, key, where);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    field_error(where + key, "has the wrong type");
  }
}

int node_from_json(const json& j, DecisionTree& tree, const ForestModel& model, const std::string& where,
                   int depth) {
  if (depth > 4096) field_error(where, "nests too deeply");
  const int index = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (j.is_object() && j.contains("counts")) {
    auto counts = require_as<std::vector<std::uint32_t>>(j, "counts", where);
    if (counts.size() != model.class_count) field_error(where + "counts", "does not have class_count entries");
    TreeNode& leaf = tree.nodes[index];
    leaf.label = static_cast<std::uint32_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    leaf.counts = std::move(counts);
    return index;
  }
  const int feature = require_as<int>(j, "feature", where);
  if (feature < 0 || static_cast<std::size_t>(feature) >= model.dim) field_error(where + "feature", "is out of range");
  const double threshold = require_as<double>(j, "threshold", where);
  const int left = node_from_json(require(j, "left", where), tree, model, where + "left.", depth + 1);
  const int right = node_from_json(require(j, "right", where), tree, model, where + "right.", depth + 1);
  TreeNode& n = tree.nodes[index];
  n.feature = feature;
  n.threshold = threshold;
  n.left = left;
  n.right = right;
  return index;
}

}  // namespace

std::string model_to_json(const ForestModel& model) {
  json trees = json::array();
  for (const DecisionTree& t : model.trees) trees.push_back(node_to_json(t, 0));
  json j{{"version", kForestFormatVersion},
         {"tag", model.tag},
         {"class_count", model.class_count},
         {"dim", model.dim},
         {"params",
          {{"trees", model.params.trees},
           {"max_depth", model.params.max_depth},
           {"min_leaf", model.params.min_leaf},
           {"features_per_split", model.params.features_per_split},
           {"bootstrap", model.params.bootstrap},
           {"seed", model.params.seed}}},
         {"trees", std::move(trees)}};
  return j.dump();
}

ForestModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("forest model: malformed JSON: ") + e.what());
  }
  const int version = require_as<int>(j, "version", "");
  if (version != kForestFormatVersion) {
    field_error("version", "is " + std::to_string(version) + ", expected " + std::to_string(kForestFormatVersion));
  }
  ForestModel m;
  m.tag = j.value("tag", std::string());
  m.class_count = require_as<std::size_t>(j, "class_count", "");
  m.dim = require_as<std::size_t>(j, "dim", "");
  if (m.class_count == 0) field_error("class_count", "must be positive");
  if (m.dim == 0) field_error("dim", "must be positive");
  const json& p = require(j, "params", "");
  m.params.trees = require_as<int>(p, "trees", "params.");
  m.params.max_depth = require_as<int>(p, "max_depth", "params.");
  m.params.min_leaf = require_as<int>(p, "min_leaf", "params.");
  m.params.features_per_split = require_as<int>(p, "features_per_split", "params.");
  m.params.bootstrap = require_as<bool>(p, "bootstrap", "params.");
  m.params.seed = require_as<std::uint64_t>(p, "seed", "params.");
  const json& trees = require(j, "trees", "");
  if (!trees.is_array() || trees.empty()) field_error("trees", "must be a non-empty array");
  for (std::size_t t = 0; t < trees.size(); ++t) {
    DecisionTree tree;
    node_from_json(trees[t], tree, m, "trees[" + std::to_string(t) + "].", 0);
    m.trees.push_back(std::move(tree));
  }
  return m;
}

void save_model(const ForestModel& model, const std::filesystem::path& path) {
  if (model.trees.empty()) throw std::invalid_argument("save_model: model has no trees");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << model_to_json(model) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

ForestModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace smartinspect
