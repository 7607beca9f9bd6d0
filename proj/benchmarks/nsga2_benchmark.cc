#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "lanepareto/nsga2.h"

namespace lanepareto {
namespace {

void BM_FastNondominatedSort(benchmark::State& state) {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Evaluation> pop(state.range(0));
  for (Evaluation& e : pop) {
    for (double& f : e.objectives) f = u(gen);
    if (u(gen) < 0.2) e.violation = u(gen);
  }
  for (auto _ : state) benchmark::DoNotOptimize(FastNondominatedSort(pop));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FastNondominatedSort)->RangeMultiplier(2)->Range(32, 512)->Complexity();

}  // namespace
}  // namespace lanepareto
