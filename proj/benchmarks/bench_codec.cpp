#include <benchmark/benchmark.h>

#include "supergaze/gaze_codec.hpp"

using namespace supergaze;

static void BM_EncodeDecode(benchmark::State& state) {
  double yaw = -3.0;
  for (auto _ : state) {
    yaw += 1e-4;
    if (yaw > 3.0) yaw = -3.0;
    const codec::YawPitch out = codec::decode(codec::encode({yaw, 0.4}));
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_EncodeDecode);

static void BM_AngularError(benchmark::State& state) {
  const codec::GazeVector a{0.3, -0.2, 0.9};
  codec::GazeVector b{-0.1, 0.4, 0.8};
  for (auto _ : state) {
    b.x += 1e-7;
    benchmark::DoNotOptimize(codec::angular_error_deg(a, b));
  }
}
BENCHMARK(BM_AngularError);

BENCHMARK_MAIN();
