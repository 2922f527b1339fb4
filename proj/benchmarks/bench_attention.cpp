#include <benchmark/benchmark.h>

#include "supergaze/dheca.hpp"
#include "supergaze/rng.hpp"

using namespace supergaze;

namespace {

Tensor random_tokens(int rows, int dim, uint64_t seed) {
  Rng rng(seed);
  Tensor t({rows, dim});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-1, 1);
  return t;
}

}  // namespace

/// One bidirectional block at the static-mode sequence lengths
/// (196 head + CLS, 8 eye + CLS) across model widths.
static void BM_DualBlockForward(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  Rng rng(1);
  net::DualBlock block("blk", dim, 8, 4);
  block.init(rng);
  const Tensor head = random_tokens(197, dim, 2);
  const Tensor eye = random_tokens(9, dim, 3);
  Tensor head_out, eye_out;
  for (auto _ : state) {
    block.forward(head, eye, head_out, eye_out, nullptr);
    block.clear_cache();
    benchmark::DoNotOptimize(head_out);
  }
}
BENCHMARK(BM_DualBlockForward)->Arg(64)->Arg(128)->Arg(512);

/// Full fusion module (embedding, blocks, summary extraction).
static void BM_FusionModuleForward(benchmark::State& state) {
  const int depth = static_cast<int>(state.range(0));
  net::DhecaConfig cfg;
  cfg.depth = depth;
  cfg.dim = 128;
  cfg.heads = 8;
  cfg.mlp_ratio = 4;
  Rng rng(4);
  net::DhecaModule module(cfg, 196, 8, rng);
  const Tensor head = random_tokens(196, cfg.dim, 5);
  const Tensor eye = random_tokens(8, cfg.dim, 6);
  for (auto _ : state) {
    const Tensor fused = module.forward(head, eye);
    module.clear_cache();
    benchmark::DoNotOptimize(fused);
  }
}
BENCHMARK(BM_FusionModuleForward)->Arg(1)->Arg(4);

BENCHMARK_MAIN();
