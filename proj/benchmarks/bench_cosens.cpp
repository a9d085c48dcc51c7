// Microbenchmarks for the hot paths: the propensity IRLS fit, the
// sorted-threshold MSM solver, entropy balancing and cluster resampling.

#include <benchmark/benchmark.h>

#include "cosens/bootstrap.hpp"
#include "cosens/estimate.hpp"
#include "cosens/rng.hpp"
#include "cosens/sensitivity.hpp"
#include "cosens/simulate.hpp"
#include "cosens/weights.hpp"

namespace {

using namespace cosens;

SimDraw make_draw(int clusters_per_arm, int size) {
  DgpConfig cfg;
  cfg.m1 = clusters_per_arm;
  cfg.m0 = clusters_per_arm;
  cfg.size_lo = size;
  cfg.size_hi = size;
  cfg.seed = 12345;
  return simulate_draw(cfg, cfg.seed);
}

void BM_FitPropensity(benchmark::State& state) {
  SimDraw draw = make_draw(static_cast<int>(state.range(0)), 80);
  for (auto _ : state) {
    PropensityFit fit = fit_propensity(draw.ds, Conditioning::cud);
    benchmark::DoNotOptimize(fit.scores.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(draw.ds.n()));
}
BENCHMARK(BM_FitPropensity)->Arg(22)->Arg(64);

void BM_MsmBounds(benchmark::State& state) {
  SimDraw draw = make_draw(static_cast<int>(state.range(0)), 80);
  PropensityFit fit = fit_propensity(draw.ds, Conditioning::cud);
  WeightSet w = weights_from_propensity(fit, Estimand::att);
  for (auto _ : state) {
    MsmResult r = msm_bounds(draw.ds, w, 2.0);
    benchmark::DoNotOptimize(r.lower);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(draw.ds.n()));
}
BENCHMARK(BM_MsmBounds)->Arg(22)->Arg(64)->Arg(256);

void BM_EntropyBalancing(benchmark::State& state) {
  SimDraw draw = make_draw(static_cast<int>(state.range(0)), 80);
  for (auto _ : state) {
    WeightSet w = balancing_weights(draw.ds, Estimand::att);
    benchmark::DoNotOptimize(w.values.data());
  }
}
BENCHMARK(BM_EntropyBalancing)->Arg(22)->Arg(64);

void BM_ResampleClusters(benchmark::State& state) {
  SimDraw draw = make_draw(static_cast<int>(state.range(0)), 80);
  RngStream rng(7);
  for (auto _ : state) {
    try {
      CosDataset ds = resample_clusters(draw.ds, rng);
      benchmark::DoNotOptimize(ds.n());
    } catch (const Error&) {
    }
  }
}
BENCHMARK(BM_ResampleClusters)->Arg(22)->Arg(64);

void BM_VbmThreshold(benchmark::State& state) {
  SimDraw draw = make_draw(22, 80);
  PropensityFit fit = fit_propensity(draw.ds, Conditioning::cud);
  WeightSet w = weights_from_propensity(fit, Estimand::att);
  EffectEstimate est = point_estimate(draw.ds, w);
  for (auto _ : state) {
    ThresholdResult t = vbm_threshold(est);
    benchmark::DoNotOptimize(t.value);
  }
}
BENCHMARK(BM_VbmThreshold);

}  // namespace

BENCHMARK_MAIN();
