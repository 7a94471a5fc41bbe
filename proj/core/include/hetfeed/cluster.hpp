#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hetfeed/embed.hpp"

namespace hetfeed {

/// Row-major dense point set.
class PointMatrix {
 public:
  PointMatrix() = default;
  PointMatrix(std::size_t rows, std::size_t dim)
      : rows_(rows), dim_(dim), data_(rows * dim, 0.0) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dim() const noexcept { return dim_; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * dim_, dim_}; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }

  void push_back(std::span<const double> values);

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

double squared_distance(std::span<const double> a, std::span<const double> b);

/// Nearest centroid by squared Euclidean distance; ties go to the lower index.
std::size_t nearest_centroid(const PointMatrix& centroids,
                             std::span<const double> v);

struct KMeansOptions {
  std::size_t k = 10;
  std::size_t restarts = 10;
  std::uint64_t seed = 0;
  std::size_t max_iters = 100;
};

struct KMeansFit {
  PointMatrix centroids;
  std::vector<std::size_t> labels;
  double inertia = 0.0;
  std::size_t best_restart = 0;
  std::size_t iterations = 0;  // Lloyd iterations of the winning restart
};

/// Called after every Lloyd update with the inertia of the current
/// (assignment, centroid) state.
using InertiaObserver =
    std::function<void(std::size_t restart, std::size_t iteration, double inertia)>;

/// k-means++ seeding and Lloyd iterations per restart; the restart with the
/// lowest inertia wins (earliest on ties). Each restart draws from its own
/// seed derived from (options.seed, restart index).
KMeansFit kmeans_dense(const PointMatrix& points, const KMeansOptions& options,
                       const InertiaObserver& observer = {});

/// Fitted model over prompt embeddings.
struct ClusterModel {
  std::size_t k = 0;
  PointMatrix centroids;
  std::map<std::string, int> assignments;  // prompt_key -> cluster
  double inertia = 0.0;
  std::size_t restarts_used = 0;
  std::uint64_t seed = 0;
};

/// Points are taken in prompt_key order, so the model does not depend on the
/// order the embeddings were produced in.
ClusterModel kmeans_fit(const EmbeddingMap& points, const KMeansOptions& options);

std::size_t assign(const ClusterModel& model, std::span<const double> v);

nlohmann::json to_json(const ClusterModel& model);

}  // namespace hetfeed
