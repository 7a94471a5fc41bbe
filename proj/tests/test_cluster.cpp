#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "hetfeed/cluster.hpp"
#include "hetfeed/error.hpp"
#include "oracles.hpp"

using namespace hetfeed;

namespace {

PointMatrix random_points(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PointMatrix m(n, dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& x : m.row(i)) x = u(rng);
  }
  return m;
}

std::vector<std::vector<double>> rows_of(const PointMatrix& m) {
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < m.rows(); ++i) out.emplace_back(m.row(i).begin(), m.row(i).end());
  return out;
}

}  // namespace

TEST_CASE("two separated groups are recovered with centroids at group means") {
  const std::size_t dim = 8;
  PointMatrix pts;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> jitter(-0.01, 0.01);
  for (int i = 0; i < 20; ++i) {
    std::vector<double> v(dim, 0.0);
    if (i % 2 == 0) v[dim - 1] = 1.0; else v[0] = 1.0;
    for (auto& x : v) x += jitter(rng);
    pts.push_back(v);
  }
  auto fit = kmeans_dense(pts, {2, 10, 1, 100});
  for (std::size_t i = 0; i < pts.rows(); ++i) {
    CHECK((fit.labels[i] == fit.labels[0]) == (i % 2 == 0));
  }
  for (std::size_t c = 0; c < 2; ++c) {
    std::vector<double> mean(dim, 0.0);
    std::size_t n = 0;
    for (std::size_t i = 0; i < pts.rows(); ++i) {
      if (fit.labels[i] != c) continue;
      for (std::size_t j = 0; j < dim; ++j) mean[j] += pts.row(i)[j];
      ++n;
    }
    for (std::size_t j = 0; j < dim; ++j) {
      CHECK(fit.centroids.row(c)[j] == doctest::Approx(mean[j] / n).epsilon(1e-12));
    }
  }
}

TEST_CASE("k equal to the number of points gives zero inertia") {
  auto pts = random_points(12, 5, 3);
  auto fit = kmeans_dense(pts, {12, 3, 9, 100});
  CHECK(fit.inertia == 0.0);
  std::set<std::size_t> labels(fit.labels.begin(), fit.labels.end());
  CHECK(labels.size() == 12);
}

TEST_CASE("8 planar points: matches brute-force bipartition optimum") {
  int hits = 0;
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    auto plane = random_points(8, 2, 1000 + trial);
    PointMatrix lifted(8, 6);
    for (std::size_t i = 0; i < 8; ++i) {
      lifted.row(i)[0] = plane.row(i)[0];
      lifted.row(i)[3] = plane.row(i)[1];
    }
    const double best = oracle::best_bipartition_inertia(rows_of(lifted));
    auto fit = kmeans_dense(lifted, {2, 10, trial, 100});
    CHECK(fit.inertia >= best - 1e-12);
    if (std::abs(fit.inertia - best) <= 1e-9) ++hits;
  }
  CHECK(hits >= 18);
}

TEST_CASE("errors") {
  auto pts = random_points(3, 2, 1);
  CHECK_THROWS_AS(kmeans_dense(pts, {4, 1, 0, 10}), ValidationError);
  CHECK_THROWS_AS(kmeans_dense(pts, {0, 1, 0, 10}), ValidationError);
  CHECK_THROWS_AS(kmeans_dense(pts, {2, 0, 0, 10}), ValidationError);
  PointMatrix m;
  m.push_back(std::vector<double>{1.0, 2.0});
  CHECK_THROWS_AS(m.push_back(std::vector<double>{1.0}), ValidationError);
}

TEST_CASE("duplicate points still yield k nonempty clusters") {
  PointMatrix pts;
  for (int i = 0; i < 6; ++i) pts.push_back(std::vector<double>{0.0, 0.0});
  pts.push_back(std::vector<double>{1.0, 0.0});
  auto fit = kmeans_dense(pts, {3, 4, 2, 50});
  std::vector<int> counts(3, 0);
  for (auto l : fit.labels) ++counts[l];
  for (int c : counts) CHECK(c > 0);
  CHECK(fit.inertia == doctest::Approx(0.0));
}

TEST_CASE("property: Lloyd inertia never increases; final state is consistent") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    auto pts = random_points(150, 6, seed);
    std::map<std::size_t, std::vector<double>> trace;
    auto fit = kmeans_dense(pts, {5, 4, seed, 100},
                            [&](std::size_t r, std::size_t, double inertia) {
                              trace[r].push_back(inertia);
                            });
    double min_final = INFINITY;
    for (const auto& [r, t] : trace) {
      for (std::size_t i = 1; i < t.size(); ++i) CHECK(t[i] <= t[i - 1]);
      min_final = std::min(min_final, t.back());
    }
    CHECK(trace.size() == 4);
    CHECK(fit.inertia == doctest::Approx(min_final).epsilon(1e-12));

    // every centroid is the mean of its members; inertia recomputes exactly
    double inertia = 0.0;
    for (std::size_t c = 0; c < 5; ++c) {
      std::vector<double> mean(6, 0.0);
      std::size_t n = 0;
      for (std::size_t i = 0; i < pts.rows(); ++i) {
        if (fit.labels[i] != c) continue;
        for (std::size_t j = 0; j < 6; ++j) mean[j] += pts.row(i)[j];
        ++n;
      }
      REQUIRE(n > 0);
      for (std::size_t j = 0; j < 6; ++j) CHECK(std::abs(fit.centroids.row(c)[j] - mean[j] / n) <= 1e-9);
    }
    for (std::size_t i = 0; i < pts.rows(); ++i) {
      inertia += squared_distance(pts.row(i), fit.centroids.row(fit.labels[i]));
    }
    CHECK(inertia == doctest::Approx(fit.inertia).epsilon(1e-12));

    auto again = kmeans_dense(pts, {5, 4, seed, 100});
    CHECK(again.labels == fit.labels);
    CHECK(again.inertia == fit.inertia);
  }
}

TEST_CASE("kmeans_fit over embeddings is independent of insertion order") {
  EmbeddingMap a, b;
  auto pts = random_points(40, 4, 77);
  for (std::size_t i = 0; i < 40; ++i) {
    EmbeddingVector v{"key" + std::to_string(i), {pts.row(i).begin(), pts.row(i).end()}};
    a.emplace(v.prompt_key, v);
  }
  for (auto it = a.rbegin(); it != a.rend(); ++it) b.emplace(it->first, it->second);
  auto ma = kmeans_fit(a, {4, 3, 5, 100});
  auto mb = kmeans_fit(b, {4, 3, 5, 100});
  CHECK(ma.assignments == mb.assignments);
  CHECK(ma.inertia == mb.inertia);
  CHECK(ma.assignments.size() == 40);
  CHECK(ma.restarts_used == 3);
  auto j = to_json(ma);
  CHECK(j.at("k") == 4);
  CHECK(j.at("centroids").size() == 4);
}

TEST_CASE("assign") {
  ClusterModel model;
  model.k = 5;
  model.centroids = PointMatrix(5, 2);
  const double cs[5][2] = {{0, 0}, {1, 0}, {5, 5}, {2, 2}, {3, 0}};
  for (std::size_t c = 0; c < 5; ++c) {
    model.centroids.row(c)[0] = cs[c][0];
    model.centroids.row(c)[1] = cs[c][1];
  }
  CHECK(assign(model, std::vector<double>{2, 2}) == 3);
  // equidistant from centroid 1 (1,0) and centroid 4 (3,0)
  CHECK(assign(model, std::vector<double>{2, 0}) == 1);
  CHECK_THROWS_AS(assign(model, std::vector<double>{1, 2, 3}), ValidationError);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-2, 6);
  const auto rows = rows_of(model.centroids);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> v{u(rng), u(rng)};
    CHECK(assign(model, v) == oracle::nearest_row(rows, v));
  }
}
