#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "aquarender/adversarial.hpp"
#include "aquarender/discriminator.hpp"
#include "aquarender/physics.hpp"
#include "aquarender/restoration.hpp"
#include "aquarender/synthetic.hpp"

using namespace aquarender;

namespace {

RenderModel bench_model() {
  std::mt19937_64 rng(7);
  return synthetic::random_model(rng, 2.5);
}

void BM_Render(benchmark::State& state) {
  const int w = static_cast<int>(state.range(0));
  const int h = static_cast<int>(state.range(1));
  const fit::Scene s = synthetic::textured_scene(w, h, 1, {0.3, 2.5});
  const RenderModel m = bench_model();
  for (auto _ : state) benchmark::DoNotOptimize(physics::render(s.image, s.depth, m, 3));
  state.SetItemsProcessed(state.iterations() * w * h);
}
BENCHMARK(BM_Render)->Args({64, 48})->Args({640, 480});

void BM_RenderGradients(benchmark::State& state) {
  const fit::Scene s = synthetic::textured_scene(64, 48, 2, {0.3, 2.5});
  const RenderModel m = bench_model();
  for (auto _ : state) benchmark::DoNotOptimize(physics::render_gradients(s.image, s.depth, m));
}
BENCHMARK(BM_RenderGradients);

void BM_DiscriminatorForward(benchmark::State& state) {
  const Discriminator d = Discriminator::initialized(1);
  const fit::Scene s = synthetic::textured_scene(Discriminator::kInputWidth, Discriminator::kInputHeight, 3,
                                                 {0.3, 2.5});
  for (auto _ : state) benchmark::DoNotOptimize(d.logit(s.image));
}
BENCHMARK(BM_DiscriminatorForward);

void BM_DiscriminatorLossGradient(benchmark::State& state) {
  const Discriminator d = Discriminator::initialized(1);
  std::vector<LinearImage> reals;
  std::vector<LinearImage> fakes;
  for (int i = 0; i < 16; ++i) {
    reals.push_back(synthetic::textured_scene(Discriminator::kInputWidth, Discriminator::kInputHeight, 10 + i,
                                              {0.3, 2.5}).image);
    fakes.push_back(synthetic::textured_scene(Discriminator::kInputWidth, Discriminator::kInputHeight, 40 + i,
                                              {0.3, 2.5}).image);
  }
  std::vector<double> grad(d.weight_count());
  for (auto _ : state) {
    std::fill(grad.begin(), grad.end(), 0.0);
    benchmark::DoNotOptimize(fit::disc_loss(reals, fakes, d, grad));
  }
}
BENCHMARK(BM_DiscriminatorLossGradient)->Unit(benchmark::kMillisecond);

void BM_EstimateDepth(benchmark::State& state) {
  const int w = static_cast<int>(state.range(0));
  const int h = static_cast<int>(state.range(1));
  const RenderModel m = bench_model();
  const fit::Scene s = synthetic::gray_scene(w, h, 4, {0.3, 2.5});
  const LinearImage uw = physics::render(s.image, s.depth, m, 0);
  for (auto _ : state) benchmark::DoNotOptimize(restore::estimate_depth(uw, m));
  state.SetItemsProcessed(state.iterations() * w * h);
}
BENCHMARK(BM_EstimateDepth)->Args({64, 48})->Args({640, 480})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
