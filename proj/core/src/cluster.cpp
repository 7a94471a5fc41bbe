#include "hetfeed/cluster.hpp"

#include <algorithm>
#include <limits>

#include "hetfeed/error.hpp"
#include "hetfeed/rng.hpp"

namespace hetfeed {

using nlohmann::json;

void PointMatrix::push_back(std::span<const double> values) {
  if (rows_ == 0 && dim_ == 0) dim_ = values.size();
  if (values.size() != dim_) {
    throw ValidationError("point dimension " + std::to_string(values.size()) +
                          " differs from " + std::to_string(dim_));
  }
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::size_t nearest_centroid(const PointMatrix& centroids,
                             std::span<const double> v) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double d = squared_distance(centroids.row(c), v);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

namespace {

double total_inertia(const PointMatrix& points, const PointMatrix& centroids,
                     const std::vector<std::size_t>& labels) {
  double s = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    s += squared_distance(points.row(i), centroids.row(labels[i]));
  }
  return s;
}

PointMatrix kmeanspp_seed(const PointMatrix& points, std::size_t k, Rng& rng) {
  const std::size_t n = points.rows();
  PointMatrix centroids;
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());

  auto add_center = [&](std::size_t idx) {
    centroids.push_back(points.row(idx));
    const auto c = centroids.row(centroids.rows() - 1);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points.row(i), c));
    }
  };

  add_center(rng.below(n));
  while (centroids.rows() < k) {
    double total = 0.0;
    for (double d : d2) total += d;
    if (total <= 0.0) {
      add_center(rng.below(n));
      continue;
    }
    const double target = rng.uniform() * total;
    double cum = 0.0;
    std::size_t pick = n;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      last_positive = i;
      cum += d2[i];
      if (cum > target) {
        pick = i;
        break;
      }
    }
    add_center(pick == n ? last_positive : pick);
  }
  return centroids;
}

// Moves the point farthest from its centroid into each empty cluster. Donor
// clusters must keep at least one point.
void reseed_empty(const PointMatrix& points, PointMatrix& centroids,
                  std::vector<std::size_t>& labels,
                  std::vector<std::size_t>& counts) {
  std::vector<double> dist;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] != 0) continue;
    if (dist.empty()) {
      dist.resize(points.rows());
      for (std::size_t i = 0; i < points.rows(); ++i) {
        dist[i] = squared_distance(points.row(i), centroids.row(labels[i]));
      }
    }
    std::size_t far = points.rows();
    double far_d = -1.0;
    for (std::size_t i = 0; i < points.rows(); ++i) {
      if (counts[labels[i]] < 2) continue;
      if (dist[i] > far_d) {
        far_d = dist[i];
        far = i;
      }
    }
    if (far == points.rows()) {
      throw Error(ErrorKind::runtime, "k-means: no donor point for empty cluster");
    }
    --counts[labels[far]];
    labels[far] = c;
    counts[c] = 1;
    dist[far] = 0.0;
    auto dst = centroids.row(c);
    auto src = points.row(far);
    std::copy(src.begin(), src.end(), dst.begin());
  }
}

void update_means(const PointMatrix& points, PointMatrix& centroids,
                  const std::vector<std::size_t>& labels,
                  const std::vector<std::size_t>& counts) {
  PointMatrix sums(centroids.rows(), centroids.dim());
  for (std::size_t i = 0; i < points.rows(); ++i) {
    auto s = sums.row(labels[i]);
    auto p = points.row(i);
    for (std::size_t j = 0; j < p.size(); ++j) s[j] += p[j];
  }
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    auto dst = centroids.row(c);
    auto s = sums.row(c);
    const double n = static_cast<double>(counts[c]);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = s[j] / n;
  }
}

KMeansFit run_restart(const PointMatrix& points, const KMeansOptions& opt,
                      std::size_t restart, const InertiaObserver& observer) {
  Rng rng(derive_seed(opt.seed, restart));
  KMeansFit fit;
  fit.centroids = kmeanspp_seed(points, opt.k, rng);
  fit.labels.assign(points.rows(), std::numeric_limits<std::size_t>::max());
  std::vector<std::size_t> counts(opt.k);

  for (std::size_t iter = 0; iter < opt.max_iters; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < points.rows(); ++i) {
      const std::size_t c = nearest_centroid(fit.centroids, points.row(i));
      if (c != fit.labels[i]) {
        fit.labels[i] = c;
        changed = true;
      }
    }
    if (!changed) break;

    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t c : fit.labels) ++counts[c];
    reseed_empty(points, fit.centroids, fit.labels, counts);
    update_means(points, fit.centroids, fit.labels, counts);
    ++fit.iterations;
    if (observer) {
      observer(restart, fit.iterations,
               total_inertia(points, fit.centroids, fit.labels));
    }
  }
  fit.inertia = total_inertia(points, fit.centroids, fit.labels);
  fit.best_restart = restart;
  return fit;
}

}  // namespace

KMeansFit kmeans_dense(const PointMatrix& points, const KMeansOptions& options,
                       const InertiaObserver& observer) {
  if (options.k < 1) throw ValidationError("k-means: k must be >= 1");
  if (options.restarts < 1) throw ValidationError("k-means: restarts must be >= 1");
  if (options.max_iters < 1) throw ValidationError("k-means: max_iters must be >= 1");
  if (points.rows() < options.k) {
    throw ValidationError("k-means: " + std::to_string(points.rows()) +
                          " points cannot form " + std::to_string(options.k) +
                          " clusters");
  }
  if (points.dim() == 0) throw ValidationError("k-means: zero-dimensional points");

  KMeansFit best;
  for (std::size_t r = 0; r < options.restarts; ++r) {
    KMeansFit fit = run_restart(points, options, r, observer);
    if (r == 0 || fit.inertia < best.inertia) best = std::move(fit);
  }
  return best;
}

ClusterModel kmeans_fit(const EmbeddingMap& points, const KMeansOptions& options) {
  PointMatrix matrix;
  std::vector<const std::string*> keys;
  keys.reserve(points.size());
  for (const auto& [key, v] : points) {
    matrix.push_back(v.values);
    keys.push_back(&key);
  }
  KMeansFit fit = kmeans_dense(matrix, options);

  ClusterModel model;
  model.k = options.k;
  model.centroids = std::move(fit.centroids);
  for (std::size_t i = 0; i < keys.size(); ++i) {
    model.assignments.emplace(*keys[i], static_cast<int>(fit.labels[i]));
  }
  model.inertia = fit.inertia;
  model.restarts_used = options.restarts;
  model.seed = options.seed;
  return model;
}

std::size_t assign(const ClusterModel& model, std::span<const double> v) {
  if (v.size() != model.centroids.dim()) {
    throw ValidationError("assign: vector dim " + std::to_string(v.size()) +
                          " != centroid dim " +
                          std::to_string(model.centroids.dim()));
  }
  return nearest_centroid(model.centroids, v);
}

json to_json(const ClusterModel& model) {
  json centroids = json::array();
  for (std::size_t c = 0; c < model.centroids.rows(); ++c) {
    auto row = model.centroids.row(c);
    centroids.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return json{{"k", model.k},
              {"centroids", std::move(centroids)},
              {"inertia", model.inertia},
              {"restarts", model.restarts_used},
              {"seed", model.seed},
              {"assignments", model.assignments}};
}

}  // namespace hetfeed
