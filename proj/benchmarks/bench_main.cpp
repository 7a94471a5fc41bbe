#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "hetfeed/cluster.hpp"
#include "hetfeed/embed.hpp"
#include "hetfeed/select.hpp"
#include "hetfeed/text.hpp"

namespace {

hetfeed::PointMatrix points(std::size_t n, std::size_t dim) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  hetfeed::PointMatrix m(n, dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& x : m.row(i)) x = g(rng);
  }
  return m;
}

std::vector<std::string> prompts(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back("Question " + std::to_string(i) +
                  ": how should the reward model weigh response number " +
                  std::to_string(i * 7 % 13) + "?");
  }
  return out;
}

void BM_HashEmbed(benchmark::State& state) {
  const auto ps = prompts(256);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(hetfeed::hash_embed(ps[i++ % ps.size()], 384, 0));
  }
}
BENCHMARK(BM_HashEmbed);

void BM_KMeans(benchmark::State& state) {
  const auto pts = points(static_cast<std::size_t>(state.range(0)), 384);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hetfeed::kmeans_dense(pts, {10, 1, 0, 100}).inertia);
  }
}
BENCHMARK(BM_KMeans)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Select(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto ps = prompts(n);
  std::vector<hetfeed::UnifiedPair> pairs;
  std::map<std::string, int> assignments;
  std::mt19937_64 rng(2);
  for (std::size_t i = 0; i < n; ++i) {
    hetfeed::UnifiedPair p;
    p.pair_id = "s/" + std::to_string(i);
    p.prompt = ps[i];
    p.chosen = "a";
    p.rejected = "b";
    p.quality = static_cast<double>(rng() % 1000) / 1000.0;
    p.source_id = "s";
    assignments[hetfeed::prompt_key(p.prompt)] = static_cast<int>(i % 10);
    pairs.push_back(std::move(p));
  }
  hetfeed::SelectionConfig cfg;
  cfg.fraction = 0.4;
  cfg.policies = {{"s", hetfeed::FilterPolicy::quality}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(hetfeed::select_pairs(pairs, assignments, cfg).pairs.size());
  }
}
BENCHMARK(BM_Select)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
