#include <benchmark/benchmark.h>

#include "kfp/force_model.hpp"
#include "kfp/limit_lab.hpp"
#include "kfp/rng.hpp"
#include "kfp/sde_sim.hpp"
#include "kfp/stat_suite.hpp"

namespace {

void BM_PhiloxU64(benchmark::State& st) {
  kfp::RngStream rng(1, 0);
  for (auto _ : st) benchmark::DoNotOptimize(rng.next_u64());
}
BENCHMARK(BM_PhiloxU64);

void BM_Normal(benchmark::State& st) {
  kfp::RngStream rng(1, 0);
  for (auto _ : st) benchmark::DoNotOptimize(rng.normal());
}
BENCHMARK(BM_Normal);

void BM_ModelBuild(benchmark::State& st) {
  const double beta = static_cast<double>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(kfp::ForceModel::canonical(beta));
}
BENCHMARK(BM_ModelBuild)->Arg(2)->Arg(7)->Unit(benchmark::kMillisecond);

void BM_FastSpeedAndPhi(benchmark::State& st) {
  const auto m = kfp::ForceModel::canonical(3.0);
  const auto fs = kfp::fast_scale(m);
  kfp::RngStream rng(2, 0);
  double s2, ph;
  for (auto _ : st) {
    fs.speed_and_phi(100.0 * rng.normal(), s2, ph);
    benchmark::DoNotOptimize(s2 + ph);
  }
}
BENCHMARK(BM_FastSpeedAndPhi);

void BM_ScaleHInv(benchmark::State& st) {
  const auto m = kfp::ForceModel::canonical(3.0);
  kfp::RngStream rng(3, 0);
  for (auto _ : st) benchmark::DoNotOptimize(kfp::scale_h_inv(m, 100.0 * rng.normal()));
}
BENCHMARK(BM_ScaleHInv);

void BM_EulerStep(benchmark::State& st) {
  const auto m = kfp::ForceModel::canonical(2.0);
  kfp::RngStream rng(4, 0);
  const long n = 10000;
  double acc = 0.0;
  for (auto _ : st) {
    kfp::euler_stream(m, 0.0, 0.0, 0.01, n, rng, [&](long, double v, double) { acc += v; });
  }
  benchmark::DoNotOptimize(acc);
  st.SetItemsProcessed(st.iterations() * n);
}
BENCHMARK(BM_EulerStep);

void BM_TimeChangePath(benchmark::State& st) {
  const auto m = kfp::ForceModel::canonical(static_cast<double>(st.range(0)));
  kfp::RngStream rng(5, 0);
  for (auto _ : st) benchmark::DoNotOptimize(kfp::simulate_timechange(m, 1e-2, {1.0}, rng));
}
BENCHMARK(BM_TimeChangePath)->Arg(2)->Arg(7)->Unit(benchmark::kMicrosecond);

void BM_StableCdf(benchmark::State& st) {
  const kfp::StableSpec spec{1.5, 1.0};
  double x = 0.1;
  for (auto _ : st) {
    benchmark::DoNotOptimize(kfp::stable_cdf(spec, x));
    x = x < 20.0 ? x * 1.3 : 0.1;
  }
}
BENCHMARK(BM_StableCdf)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
