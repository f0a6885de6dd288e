#include "smartinspect/semisup.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "json.hpp"
#include "smartinspect/random.hpp"

namespace smartinspect {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double kmeans_loss(std::span<const FeatureVector> points, std::span<const FeatureVector> centroids,
                   std::span<const std::size_t> assignment) {
  double j = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) j += squared_distance(points[i], centroids[assignment[i]]);
  return j;
}

namespace serial {

std::vector<std::size_t> assign(std::span<const FeatureVector> points, std::span<const FeatureVector> centroids) {
  std::vector<std::size_t> a(points.size(), 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
      const double d = squared_distance(points[i], centroids[c]);
      if (d < best) {
        best = d;
        a[i] = c;
      }
    }
  }
  return a;
}

}  // namespace serial

std::vector<std::size_t> assign_nearest(std::span<const FeatureVector> points,
                                        std::span<const FeatureVector> centroids) {
  std::vector<std::size_t> a(points.size(), 0);
  const auto n = static_cast<std::ptrdiff_t>(points.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t c = 0; c < centroids.size(); ++c) {
      const double d = squared_distance(points[i], centroids[c]);
      if (d < best) {
        best = d;
        arg = c;
      }
    }
    a[i] = arg;
  }
  return a;
}

namespace {

std::vector<FeatureVector> plus_plus_init(std::span<const FeatureVector> points, std::size_t k, Rng& rng) {
  const std::size_t n = points.size();
  std::vector<FeatureVector> centroids;
  std::vector<bool> chosen(n, false);
  std::size_t first = rng.index(n);
  centroids.push_back(points[first]);
  chosen[first] = true;

  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points[i], centroids[0]);

  while (centroids.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += d2[i];
    std::size_t pick = n;
    if (total > 0.0) {
      const double r = rng.uniform() * total;
      double cum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        cum += d2[i];
        pick = i;
        if (cum > r) break;
      }
    } else {
      // every remaining point coincides with a centroid: take any unchosen one
      std::vector<std::size_t> free;
      for (std::size_t i = 0; i < n; ++i) {
        if (!chosen[i]) free.push_back(i);
      }
      pick = free[rng.index(free.size())];
    }
    chosen[pick] = true;
    centroids.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(points[i], centroids.back()));
  }
  return centroids;
}

void update_centroids(std::span<const FeatureVector> points, std::span<const std::size_t> assignment,
                      std::vector<FeatureVector>& centroids) {
  const std::size_t k = centroids.size();
  const std::size_t dim = points[0].size();
  std::vector<FeatureVector> sums(k, FeatureVector(dim, 0.0));
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto& s = sums[assignment[i]];
    for (std::size_t d = 0; d < dim; ++d) s[d] += points[i][d];
    ++counts[assignment[i]];
  }
  std::vector<bool> reseeded(points.size(), false);
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] > 0) {
      for (std::size_t d = 0; d < dim; ++d) centroids[c][d] = sums[c][d] / static_cast<double>(counts[c]);
      continue;
    }
    // empty cluster: move it onto the point farthest from where it was
    double far = -1.0;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (reseeded[i]) continue;
      const double d = squared_distance(points[i], centroids[c]);
      if (d > far) {
        far = d;
        arg = i;
      }
    }
    reseeded[arg] = true;
    centroids[c] = points[arg];
  }
}

// One sweep of single-point transfers: move x from cluster a to b whenever
// n_b/(n_b+1)*|x-mu_b|^2 < n_a/(n_a-1)*|x-mu_a|^2, i.e. whenever the move
// lowers J. Lloyd fixed points can still admit such moves; a partition that
// admits none is also a Lloyd fixed point. Returns whether anything moved.
bool transfer_sweep(std::span<const FeatureVector> points, std::vector<std::size_t>& assignment,
                    std::vector<FeatureVector>& centroids) {
  const std::size_t k = centroids.size();
  const std::size_t dim = points[0].size();
  std::vector<std::size_t> counts(k, 0);
  for (auto a : assignment) ++counts[a];
  bool moved = false;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::size_t a = assignment[i];
    if (counts[a] <= 1) continue;
    const double na = static_cast<double>(counts[a]);
    const double leave = na / (na - 1.0) * squared_distance(points[i], centroids[a]);
    double best = leave * (1.0 - 1e-12);
    std::size_t to = k;
    for (std::size_t b = 0; b < k; ++b) {
      if (b == a) continue;
      const double nb = static_cast<double>(counts[b]);
      const double join = nb / (nb + 1.0) * squared_distance(points[i], centroids[b]);
      if (join < best) {
        best = join;
        to = b;
      }
    }
    if (to == k) continue;
    const double nb = static_cast<double>(counts[to]);
    for (std::size_t d = 0; d < dim; ++d) {
      centroids[a][d] = (na * centroids[a][d] - points[i][d]) / (na - 1.0);
      centroids[to][d] = (nb * centroids[to][d] + points[i][d]) / (nb + 1.0);
    }
    --counts[a];
    ++counts[to];
    assignment[i] = to;
    moved = true;
  }
  // drop the incremental rounding before the next Lloyd step
  if (moved) update_centroids(points, assignment, centroids);
  return moved;
}

KMeansResult single_run(std::span<const FeatureVector> points, std::size_t k, std::uint64_t seed, int max_iter) {
  Rng rng(seed);
  KMeansResult res;
  res.centroids = plus_plus_init(points, k, rng);
  std::vector<std::size_t> previous;
  bool converged = false;
  for (int iter = 1; iter <= max_iter; ++iter) {
    std::vector<std::size_t> a = assign_nearest(points, res.centroids);
    res.loss_history.push_back(kmeans_loss(points, res.centroids, a));
    res.iterations = iter;
    if (iter > 1 && a == previous) {
      // Lloyd has settled; polish with transfers and resume if any fired
      if (!transfer_sweep(points, a, res.centroids)) {
        converged = true;
        break;
      }
      res.loss_history.push_back(kmeans_loss(points, res.centroids, a));
      previous = std::move(a);
      continue;
    }
    previous = std::move(a);
    update_centroids(points, previous, res.centroids);
  }
  res.assignment = std::move(previous);
  res.loss = kmeans_loss(points, res.centroids, res.assignment);
  if (!converged) res.loss_history.push_back(res.loss);
  return res;
}

}  // namespace

KMeansResult kmeans(std::span<const FeatureVector> points, const KMeansParams& params) {
  if (points.empty()) throw std::invalid_argument("kmeans: no points");
  if (params.k == 0) throw std::invalid_argument("kmeans: K must be positive");
  if (params.k > points.size()) {
    throw std::invalid_argument("kmeans: K = " + std::to_string(params.k) + " exceeds the point count " +
                                std::to_string(points.size()));
  }
  if (params.max_iter < 1) throw std::invalid_argument("kmeans: max_iter must be positive");
  const std::size_t dim = points[0].size();
  if (dim == 0) throw std::invalid_argument("kmeans: zero-dimensional vectors");
  for (const auto& p : points) {
    if (p.size() != dim) throw std::invalid_argument("kmeans: vectors have mixed dimensions");
  }

  KMeansResult best;
  const int restarts = std::max(1, params.restarts);
  for (int r = 0; r < restarts; ++r) {
    const std::uint64_t seed = params.seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(r);
    KMeansResult run = single_run(points, params.k, seed, params.max_iter);
    if (r == 0 || run.loss < best.loss) best = std::move(run);
  }
  return best;
}

FilterTrace cluster_filter(std::span<const FeatureVector> points, const std::map<std::size_t, RegionClass>& labels,
                           const FilterParams& params) {
  const std::size_t n = points.size();
  if (params.k == 0 || params.keep_count >= params.k) {
    throw std::invalid_argument("cluster_filter: keep count must be smaller than K");
  }
  bool any_defect = false;
  for (const auto& [index, cls] : labels) {
    if (index >= n) throw std::invalid_argument("cluster_filter: label index out of range");
    any_defect = any_defect || is_defect(cls);
  }
  if (!any_defect) {
    throw std::invalid_argument("cluster_filter: at least one labeled defect (scratch, pit or crack) is required");
  }

  FilterTrace trace;
  trace.point_count = n;
  trace.drop_threshold = params.drop_threshold > 0 ? params.drop_threshold : std::max<std::size_t>(1, n / 100);

  std::vector<std::size_t> retained(n);
  std::iota(retained.begin(), retained.end(), 0);
  std::vector<bool> dropped_flag(n, false);

  for (std::uint64_t round = 0;; ++round) {
    std::vector<FeatureVector> subset;
    subset.reserve(retained.size());
    for (std::size_t i : retained) subset.push_back(points[i]);

    const std::size_t k = std::min(params.k, retained.size());
    const KMeansResult km = kmeans(subset, {k, params.seed + round, params.max_iter, params.restarts});

    FilterRound rec;
    rec.loss = km.loss;
    rec.cluster_sizes.assign(k, 0);
    std::vector<std::size_t> defects(k, 0);
    for (std::size_t j = 0; j < retained.size(); ++j) {
      const std::size_t c = km.assignment[j];
      ++rec.cluster_sizes[c];
      auto it = labels.find(retained[j]);
      if (it != labels.end() && is_defect(it->second)) ++defects[c];
    }
    rec.proportions.assign(k, 0.0);
    std::vector<std::size_t> order;
    for (std::size_t c = 0; c < k; ++c) {
      if (rec.cluster_sizes[c] == 0) continue;
      rec.proportions[c] = static_cast<double>(defects[c]) / static_cast<double>(rec.cluster_sizes[c]);
      order.push_back(c);
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return rec.proportions[a] > rec.proportions[b]; });
    order.resize(std::min(order.size(), params.keep_count));
    std::vector<bool> keep(k, false);
    for (std::size_t c : order) keep[c] = true;
    rec.kept_clusters = order;
    std::sort(rec.kept_clusters.begin(), rec.kept_clusters.end());

    std::vector<std::size_t> next;
    for (std::size_t j = 0; j < retained.size(); ++j) {
      const std::size_t i = retained[j];
      if (keep[km.assignment[j]]) {
        next.push_back(i);
        continue;
      }
      auto it = labels.find(i);
      if (!params.strict_drop && it != labels.end() && is_defect(it->second)) {
        next.push_back(i);  // labeled defects survive their cluster
        continue;
      }
      dropped_flag[i] = true;
      ++rec.dropped;
    }
    retained = std::move(next);
    const std::size_t dropped_now = rec.dropped;
    trace.rounds.push_back(std::move(rec));

    if (dropped_now < trace.drop_threshold) {
      trace.stop_reason = "below_threshold";
      break;
    }
    if (retained.size() <= params.k) {
      trace.stop_reason = "retained_at_most_k";
      break;
    }
  }

  trace.retained = retained;
  for (std::size_t i = 0; i < n; ++i) {
    if (dropped_flag[i]) trace.dropped.push_back(i);
  }
  return trace;
}

std::vector<Verdict> pseudo_labels(const FilterTrace& trace, const std::map<std::size_t, RegionClass>& labels) {
  std::vector<Verdict> out(trace.point_count, Verdict::Background);
  for (std::size_t i : trace.retained) out[i] = Verdict::Defect;
  for (const auto& [index, cls] : labels) {
    if (index < out.size()) out[index] = project(cls);
  }
  return out;
}

std::string trace_to_json(const FilterTrace& trace, const FilterParams& params) {
  nlohmann::json j;
  j["params"] = {{"k", params.k},
                 {"keep", params.keep_count},
                 {"drop_threshold", trace.drop_threshold},
                 {"seed", params.seed},
                 {"strict_drop", params.strict_drop}};
  j["point_count"] = trace.point_count;
  j["stop_reason"] = trace.stop_reason;
  nlohmann::json rounds = nlohmann::json::array();
  for (const FilterRound& r : trace.rounds) {
    rounds.push_back({{"kept_clusters", r.kept_clusters},
                      {"dropped", r.dropped},
                      {"proportions", r.proportions},
                      {"cluster_sizes", r.cluster_sizes},
                      {"loss", r.loss}});
  }
  j["rounds"] = std::move(rounds);
  j["retained"] = trace.retained;
  j["dropped"] = trace.dropped;
  return j.dump(2);
}

}  // namespace smartinspect
