#include <benchmark/benchmark.h>

#include <vector>

#include "adrobust/evaluation.hpp"
#include "adrobust/feature_pipeline.hpp"
#include "adrobust/random.hpp"
#include "adrobust/scorers.hpp"

using namespace adrobust;

namespace {

// Pooled EfficientNet-B4 layout: 112 + 272 + 448 channels.
std::vector<EmbeddingVector> pooled_embeddings(int n, std::uint64_t seed) {
  Rng rng(seed);
  const std::vector<LevelSlice> slices = {{"block4", 0, 112}, {"block6", 112, 384}, {"block7", 384, 832}};
  std::vector<EmbeddingVector> out;
  for (int i = 0; i < n; ++i) {
    std::vector<double> v(832);
    for (auto& x : v) x = rng.normal();
    out.push_back({std::move(v), slices});
  }
  return out;
}

std::vector<const EmbeddingVector*> pointers(const std::vector<EmbeddingVector>& v) {
  std::vector<const EmbeddingVector*> out;
  for (const auto& e : v) out.push_back(&e);
  return out;
}

void BM_MahalanobisFit(benchmark::State& state) {
  const auto data = pooled_embeddings(static_cast<int>(state.range(0)), 1);
  const auto ptrs = pointers(data);
  const auto est = state.range(1) ? Estimator::ledoit_wolf : Estimator::empirical;
  for (auto _ : state) benchmark::DoNotOptimize(maha_fit_pooled(ptrs, est));
}
BENCHMARK(BM_MahalanobisFit)->Args({10, 1})->Args({110, 1})->Args({110, 0})->Args({400, 1})->Unit(benchmark::kMillisecond);

void BM_MahalanobisScore(benchmark::State& state) {
  const auto data = pooled_embeddings(110, 2);
  const auto model = maha_fit_pooled(pointers(data), Estimator::ledoit_wolf);
  const auto probe = pooled_embeddings(1, 3)[0];
  for (auto _ : state) benchmark::DoNotOptimize(maha_score_pooled(model, probe));
}
BENCHMARK(BM_MahalanobisScore);

void BM_KnnScore(benchmark::State& state) {
  const auto data = pooled_embeddings(static_cast<int>(state.range(0)), 4);
  const auto model = knn_fit(std::span<const EmbeddingVector>(data), 1);
  const auto probe = pooled_embeddings(1, 5)[0];
  for (auto _ : state) benchmark::DoNotOptimize(knn_score(model, probe));
}
BENCHMARK(BM_KnnScore)->Arg(50)->Arg(400);

void BM_PadimFit(benchmark::State& state) {
  // Reduced grid: 12x12 locations, D channels per location.
  Rng rng(6);
  const int d = static_cast<int>(state.range(0));
  std::vector<AlignedPatchGrid> grids(40);
  for (auto& g : grids) {
    g.depth = d;
    g.height = 12;
    g.width = 12;
    g.level_slices = {{"block4", 0, static_cast<std::size_t>(d)}};
    g.values.resize(static_cast<std::size_t>(d) * 144);
    for (auto& x : g.values) x = rng.normal();
  }
  std::vector<const AlignedPatchGrid*> ptrs;
  for (const auto& g : grids) ptrs.push_back(&g);
  for (auto _ : state) benchmark::DoNotOptimize(padim_fit_aligned(ptrs));
}
BENCHMARK(BM_PadimFit)->Arg(32)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_RocAuc(benchmark::State& state) {
  Rng rng(7);
  std::vector<ScoredLabel> s(static_cast<std::size_t>(state.range(0)));
  for (auto& e : s) e = {rng.normal(), rng.bernoulli(0.5) ? Label::anomalous : Label::normal};
  for (auto _ : state) benchmark::DoNotOptimize(roc_auc(s));
}
BENCHMARK(BM_RocAuc)->Arg(200)->Arg(2000);

}  // namespace

BENCHMARK_MAIN();
