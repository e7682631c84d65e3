#include <benchmark/benchmark.h>

#include "latfuse/events.hpp"
#include "latfuse/gdt.hpp"
#include "latfuse/pyramid.hpp"
#include "latfuse/scaling.hpp"
#include "latfuse/synth.hpp"
#include "latfuse/tracking.hpp"
#include "latfuse/unified.hpp"

namespace {

using namespace latfuse;

void BM_Envelope1D(benchmark::State& state) {
  Rng rng(1);
  std::vector<double> v(static_cast<std::size_t>(state.range(0)));
  for (double& x : v) x = rng.normal(0.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(envelope_1d(v, 1.0));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Envelope1D)->RangeMultiplier(4)->Range(64, 65536)->Complexity(benchmark::oN);

void BM_Transform3D(benchmark::State& state) {
  const auto ps = random_prisms(static_cast<std::size_t>(state.range(0)), 1, 4, 1);
  Grid3D g = ps[0].grid;
  Transform3D out;
  for (auto _ : state) {
    transform_3d(g, out);
    benchmark::DoNotOptimize(out.transformed.values.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Transform3D)->RangeMultiplier(2)->Range(2048, 65536)->Complexity(benchmark::oN);

void BM_TrackPrisms(benchmark::State& state) {
  const auto ps = random_prisms(static_cast<std::size_t>(state.range(0)), 3, 4, 1);
  for (auto _ : state) benchmark::DoNotOptimize(track_prisms(ps, 1.0).objective);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_TrackPrisms)->RangeMultiplier(2)->Range(2048, 16384)->Complexity(benchmark::oN);

void BM_TrackPrismsQuadratic(benchmark::State& state) {
  const auto ps = random_prisms(static_cast<std::size_t>(state.range(0)), 3, 4, 1);
  for (auto _ : state) benchmark::DoNotOptimize(track_prisms_quadratic(ps, 1.0).objective);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_TrackPrismsQuadratic)
    ->RangeMultiplier(2)
    ->Range(256, 4096)
    ->Complexity(benchmark::oNSquared)
    ->Unit(benchmark::kMillisecond);

std::vector<FrameDetections> detections(std::size_t per_frame) {
  Scenario sc;
  sc.frames = 50;
  sc.fp_rate = static_cast<double>(per_frame);
  return gen_detections(sc).frames;
}

void BM_ViterbiTrack(benchmark::State& state) {
  const auto frames = detections(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(viterbi_track_augmented(frames, {}, true).objective);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ViterbiTrack)->RangeMultiplier(2)->Range(4, 64)->Complexity(benchmark::oNSquared);

void BM_JointMultiModel(benchmark::State& state) {
  const auto frames = detections(16);
  const auto models = fixture_models();
  for (auto _ : state) benchmark::DoNotOptimize(joint_multi_model(frames, models, {}).g_evaluations);
}
BENCHMARK(BM_JointMultiModel);

void BM_Unified(benchmark::State& state) {
  Scenario sc;
  sc.frames = 10;
  const auto prisms = gen_prisms(sc).prisms;
  const auto models = fixture_models();
  const auto& model = models[static_cast<std::size_t>(state.range(0))];
  for (auto _ : state) benchmark::DoNotOptimize(detect_track_recognize(prisms, model, 1.0).objective);
  state.SetLabel(model.name);
}
BENCHMARK(BM_Unified)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
