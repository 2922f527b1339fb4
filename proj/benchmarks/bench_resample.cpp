#include <benchmark/benchmark.h>

#include "supergaze/image.hpp"
#include "supergaze/preprocessing.hpp"
#include "supergaze/rng.hpp"

using namespace supergaze;

namespace {

ImageTensor random_image(int h, int w, uint64_t seed) {
  Rng rng(seed);
  ImageTensor img(h, w);
  for (std::size_t i = 0; i < img.size(); ++i) img.data()[i] = rng.uniform();
  return img;
}

}  // namespace

static void BM_BilinearDown(benchmark::State& state) {
  const ImageTensor img = random_image(448, 448, 1);
  for (auto _ : state) benchmark::DoNotOptimize(resize_bilinear(img, 224, 224));
}
BENCHMARK(BM_BilinearDown);

static void BM_BilinearUp(benchmark::State& state) {
  const ImageTensor img = random_image(64, 64, 2);
  for (auto _ : state) benchmark::DoNotOptimize(resize_bilinear(img, 224, 224));
}
BENCHMARK(BM_BilinearUp);

static void BM_BicubicUp(benchmark::State& state) {
  const ImageTensor img = random_image(112, 112, 3);
  for (auto _ : state) benchmark::DoNotOptimize(resize_bicubic(img, 224, 224));
}
BENCHMARK(BM_BicubicUp);

static void BM_MultiscalePyramid(benchmark::State& state) {
  const ImageTensor img = random_image(224, 224, 4);
  const auto schedule = prep::ScaleSchedule::static_default();
  for (auto _ : state) {
    for (const int s : schedule.scales) {
      benchmark::DoNotOptimize(resize_bilinear(center_crop(img, s), 224, 224));
    }
  }
}
BENCHMARK(BM_MultiscalePyramid);

BENCHMARK_MAIN();
