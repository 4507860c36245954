#include <benchmark/benchmark.h>

#include <random>

#include "freqmosaic/bayer.hpp"
#include "freqmosaic/fft.hpp"
#include "freqmosaic/kernels.hpp"
#include "freqmosaic/linegen.hpp"
#include "freqmosaic/metrics.hpp"
#include "freqmosaic/model.hpp"
#include "freqmosaic/tlc.hpp"
#include "freqmosaic/train.hpp"

using namespace freqmosaic;

namespace {

Tensor random_tensor(const Shape& shape, std::uint64_t seed) {
  Tensor t(shape);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& v : t.data()) v = u(rng);
  return t;
}

ModelConfig desk_model(std::size_t size) {
  ModelConfig cfg;
  cfg.channels = 16;
  cfg.groups = 2;
  cfg.n1 = 2;
  cfg.n2 = 2;
  cfg.selector_scale = 8;
  cfg.reduction = 4;
  cfg.train_height = cfg.train_width = size;
  return cfg;
}

void BM_conv2d_forward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto input = random_tensor({16, n, n}, 1);
  const auto weight = random_tensor({16, 16, 3, 3}, 2);
  const auto bias = random_tensor({16}, 3);
  Tensor out({16, n, n});
  for (auto _ : state) {
    kernels::conv2d_forward(input, weight, bias, 1, BorderMode::reflect, out);
    benchmark::DoNotOptimize(out.data().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(16 * 16 * 9 * n * n));
}
BENCHMARK(BM_conv2d_forward)->Arg(32)->Arg(64)->Arg(128);

void BM_fft2(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = random_tensor({16, n, n}, 4);
  for (auto _ : state) benchmark::DoNotOptimize(fft2(x));
}
BENCHMARK(BM_fft2)->Arg(32)->Arg(128);

void BM_bilinear_demosaic(benchmark::State& state) {
  const auto img = gen_pattern(random_spec(PatternKind::trig, 1, 128));
  const auto cfa = mosaic(img);
  for (auto _ : state) benchmark::DoNotOptimize(bilinear_demosaic(cfa));
}
BENCHMARK(BM_bilinear_demosaic);

void BM_dfenet_inference(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto cfg = desk_model(32);
  const auto params = init_params(cfg, 7);
  const auto cfa = mosaic(gen_pattern(random_spec(PatternKind::contour, 2, n)));
  for (auto _ : state) benchmark::DoNotOptimize(demosaic_dfenet(cfa, 0.0, params, cfg));
}
BENCHMARK(BM_dfenet_inference)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_dfenet_tiled(benchmark::State& state) {
  const auto cfg = desk_model(32);
  const auto params = init_params(cfg, 7);
  const auto cfa = mosaic(gen_pattern(random_spec(PatternKind::contour, 2, 128)));
  for (auto _ : state) benchmark::DoNotOptimize(demosaic_tiled(params, cfg, cfa, 0.0, 64, 32, 1));
}
BENCHMARK(BM_dfenet_tiled)->Unit(benchmark::kMillisecond);

void BM_stagewise_step(benchmark::State& state) {
  const auto cfg = desk_model(32);
  auto params = init_params(cfg, 7);
  auto adam = make_adam_state(params);
  const auto img = gen_pattern(random_spec(PatternKind::nested_polygon, 3, 32));
  const std::vector<Sample> batch{{mosaic(img), 0.0, img.to_tensor()}};
  TrainConfig tc;
  for (auto _ : state) benchmark::DoNotOptimize(stagewise_step(batch, params, cfg, adam, 1e-4, tc));
}
BENCHMARK(BM_stagewise_step)->Unit(benchmark::kMillisecond);

void BM_ssim(benchmark::State& state) {
  const auto a = gen_pattern(random_spec(PatternKind::trig, 5, 128));
  const auto b = bilinear_demosaic(mosaic(a));
  for (auto _ : state) benchmark::DoNotOptimize(ssim(a, b));
}
BENCHMARK(BM_ssim);

}  // namespace

BENCHMARK_MAIN();
