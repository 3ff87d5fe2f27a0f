// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "unrectify/builders.hpp"
#include "unrectify/experiments.hpp"
#include "unrectify/kernels/kernels.hpp"

namespace {

using namespace unrectify;

struct SignatureFixture {
  DagNet net = build_fusion_stack(5, 14, 7);
  std::vector<SignaturePlan> plans;
  Matrix samples;

  explicit SignatureFixture(std::size_t n) : samples(normal_samples(n, 14, 7)) {
    for (const auto& id : net.nodes()) plans.push_back(signature_plan(net, id));
  }
};

template <auto Kernel>
void BM_SignatureKeys(benchmark::State& state) {
  const SignatureFixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(f.net, f.plans, f.samples));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Kernel>
void BM_LevelOutputs(benchmark::State& state) {
  const DagNet net = build_fusion_stack(5, 20, 7);
  const Matrix samples = normal_samples(static_cast<std::size_t>(state.range(0)), 20, 7);
  std::vector<std::size_t> levels;
  for (std::size_t j = 1; j <= 5; ++j) levels.push_back(net.level_of(net.index_of(fusion_node(j, "fusion"))));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(net, levels, samples));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Kernel>
void BM_GainAllPairs(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix in = normal_samples(n, 20, 1), out = normal_samples(n, 20, 2);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(in, out));
  state.SetItemsProcessed(state.iterations() * state.range(0) * (state.range(0) - 1) / 2);
}

template <auto Kernel>
void BM_IntraDistance(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix samples = normal_samples(n, 14, 3);
  kernels::Groups groups(8);
  for (std::size_t i = 0; i < n; ++i) groups[i % 8].push_back(i);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(samples, groups));
}

}  // namespace

BENCHMARK(BM_SignatureKeys<kernels::serial::batch_signature_keys>)->Name("signature_keys/serial")->Arg(5000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SignatureKeys<kernels::omp::batch_signature_keys>)->Name("signature_keys/omp")->Arg(5000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_LevelOutputs<kernels::serial::batch_level_outputs>)->Name("level_outputs/serial")->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LevelOutputs<kernels::omp::batch_level_outputs>)->Name("level_outputs/omp")->Arg(2000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_GainAllPairs<kernels::serial::max_gain_all_pairs>)->Name("gain_all_pairs/serial")->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GainAllPairs<kernels::omp::max_gain_all_pairs>)->Name("gain_all_pairs/omp")->Arg(2000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_IntraDistance<kernels::serial::max_intra_distance>)->Name("intra_distance/serial")->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_IntraDistance<kernels::omp::max_intra_distance>)->Name("intra_distance/omp")->Arg(4000)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
