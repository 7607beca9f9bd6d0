#include <benchmark/benchmark.h>

#include "lanepareto/scenario.h"
#include "lanepareto/sim_engine.h"

namespace lanepareto {
namespace {

void BM_EvaluateCandidate(benchmark::State& state) {
  const FrozenScenario scenario = PrepareScenario(
      LoadScenario(LANEPARETO_SOURCE_DIR "/scenarios/baseline.json"));
  const LcCandidate candidate{0.0, 3.0, 60.6, 21.7, 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(EvaluateCandidate(candidate, scenario));
}
BENCHMARK(BM_EvaluateCandidate)->Unit(benchmark::kMicrosecond);

}  // namespace
}  // namespace lanepareto
