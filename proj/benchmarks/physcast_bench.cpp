#include <benchmark/benchmark.h>

#include <random>

#include "physcast/conflict_mask.hpp"
#include "physcast/estimators.hpp"
#include "physcast/objective.hpp"
#include "physcast/refiners.hpp"
#include "physcast/synth.hpp"
#include "physcast/warp.hpp"

namespace {

using namespace physcast;

ScalarField noise_field(Shape s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  ScalarField f(s);
  for (double& x : f.values()) x = d(rng);
  return f;
}

VectorField noise_flow(Shape s, double amp, std::uint64_t seed) {
  VectorField w(noise_field(s, seed), noise_field(s, seed + 1));
  return amp * w;
}

void BM_Advect(benchmark::State& state) {
  const Shape s{static_cast<int>(state.range(0)), static_cast<int>(state.range(0))};
  const ScalarField f = noise_field(s, 1);
  const VectorField w = noise_flow(s, 2.0, 2);
  const KernelConfig k{static_cast<double>(state.range(1)) / 10.0, {}};
  for (auto _ : state) benchmark::DoNotOptimize(advect(f, w, k));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(s.size()));
}
BENCHMARK(BM_Advect)->Args({64, 0})->Args({64, 1})->Args({128, 1})->Args({128, 10});

void BM_AdvectBackward(benchmark::State& state) {
  const Shape s{static_cast<int>(state.range(0)), static_cast<int>(state.range(0))};
  const ScalarField f = noise_field(s, 1), up = noise_field(s, 3);
  const VectorField w = noise_flow(s, 2.0, 2);
  for (auto _ : state) benchmark::DoNotOptimize(advect_backward(f, w, {0.1, {}}, {}, up));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(s.size()));
}
BENCHMARK(BM_AdvectBackward)->Arg(64)->Arg(128);

void BM_SplatMask(benchmark::State& state) {
  const Shape s{static_cast<int>(state.range(0)), static_cast<int>(state.range(0))};
  const VectorField w = noise_flow(s, 3.0, 4);
  const MaskThresholds th{0.05, 1.75, state.range(1) ? SplatMode::kBilinear : SplatMode::kNearest};
  for (auto _ : state) benchmark::DoNotOptimize(mask_from_flow(w, th));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(s.size()));
}
BENCHMARK(BM_SplatMask)->Args({64, 0})->Args({64, 1})->Args({128, 1});

void BM_GradTotalLoss(benchmark::State& state) {
  const Shape s{static_cast<int>(state.range(0)), static_cast<int>(state.range(0))};
  const ScalarField src = noise_field(s, 5), tgt = noise_field(s, 6);
  const VectorField w = noise_flow(s, 1.0, 7);
  const ConflictMask m = full_mask(s);
  for (auto _ : state) benchmark::DoNotOptimize(grad_total_loss(tgt, src, w, m, {}, {0.1, {}}));
}
BENCHMARK(BM_GradTotalLoss)->Arg(32)->Arg(64);

void BM_Variational(benchmark::State& state) {
  SynthSpec spec;
  spec.height = spec.width = static_cast<int>(state.range(0));
  const double c = spec.width / 2.0;
  spec.blobs = {{c, c, 6.0}};
  spec.sigma0 = 3.0;
  spec.kappa = 0.1;
  spec.flow = {FlowStep::uniform(0.7, -0.3)};
  spec.frames = 2;
  spec.escape_tolerance = 1e-3;
  const Sequence pair = synth_sequence(spec);
  VariationalConfig cfg;
  cfg.iterations = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(estimate_variational(pair, cfg, {0.1, {}}));
}
BENCHMARK(BM_Variational)->Args({24, 100})->Args({64, 100})->Unit(benchmark::kMillisecond);

void BM_MotionNetForward(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const MotionNet net = make_motion_net(4, {8, 16, 16, 16}, 1);
  nn::Tensor<float> in(4, n, n);
  std::mt19937 rng(3);
  std::uniform_real_distribution<float> d(-1.0f, 1.0f);
  for (float& x : in.data) x = d(rng);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(in));
}
BENCHMARK(BM_MotionNetForward)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Inpaint(benchmark::State& state) {
  const Shape s{static_cast<int>(state.range(0)), static_cast<int>(state.range(0))};
  const ScalarField f = noise_field(s, 8);
  const ConflictMask m = mask_from_flow(noise_flow(s, 1.5, 9), {});
  for (auto _ : state) benchmark::DoNotOptimize(refine_inpaint(f, m));
}
BENCHMARK(BM_Inpaint)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
