#include <benchmark/benchmark.h>

#include "graphclus/gcn.hpp"

using namespace graphclus;

namespace {

SubGraphInstance dense_instance(std::size_t n, std::size_t d) {
  Rng rng(9);
  SubGraphInstance inst{Matrix(n, d), Matrix(n, n), {}};
  for (std::size_t i = 0; i < n; ++i) {
    inst.ids.push_back(static_cast<VertexId>(i));
    for (std::size_t j = 0; j < d; ++j) inst.features(i, j) = rng.normal();
    for (std::size_t j = i + 1; j < n; ++j)
      inst.adjacency(i, j) = inst.adjacency(j, i) = rng.uniform();
  }
  return inst;
}

void BM_DetForward(benchmark::State& state) {
  const auto inst = dense_instance(static_cast<std::size_t>(state.range(0)), 32);
  Rng rng(1);
  const auto model = GcnDetModel::init({32, 256, 64}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(det_forward(model, inst));
}
BENCHMARK(BM_DetForward)->RangeMultiplier(4)->Range(4, 256);

void BM_DetBackward(benchmark::State& state) {
  auto inst = std::make_shared<const SubGraphInstance>(
      dense_instance(static_cast<std::size_t>(state.range(0)), 32));
  Rng rng(1);
  const auto model = GcnDetModel::init({32, 256, 64}, rng);
  std::vector<DetSample> batch{{inst, {0.5, 0.5}}};
  for (auto _ : state) benchmark::DoNotOptimize(det_loss_and_grads(model, batch));
}
BENCHMARK(BM_DetBackward)->RangeMultiplier(4)->Range(4, 256);

void BM_SegForward(benchmark::State& state) {
  const auto inst = dense_instance(static_cast<std::size_t>(state.range(0)), 32);
  Rng rng(2);
  const auto model = GcnSegModel::init({32, 256, 64}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(seg_forward(model, inst, 0));
}
BENCHMARK(BM_SegForward)->RangeMultiplier(4)->Range(4, 256);

}  // namespace
