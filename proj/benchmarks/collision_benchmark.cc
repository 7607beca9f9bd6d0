#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "lanepareto/collision.h"

namespace lanepareto {
namespace {

void BM_MinSeparation(benchmark::State& state) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::pair<EllipseBoundary, EllipseBoundary>> pairs;
  for (int i = 0; i < 256; ++i) {
    pairs.emplace_back(
        MakeBoundary({0.0, 0.0, (u(gen) - 0.5) * 0.6}, {1.0 + 2.0 * u(gen), 0.5 + u(gen)}),
        MakeBoundary({-8.0 + 16.0 * u(gen), -4.0 + 8.0 * u(gen), (u(gen) - 0.5) * 0.6},
                     {1.0 + 2.0 * u(gen), 0.5 + u(gen)}));
  }
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& [a, b] = pairs[i++ % pairs.size()];
    benchmark::DoNotOptimize(MinSeparation(a, b));
  }
}
BENCHMARK(BM_MinSeparation);

}  // namespace
}  // namespace lanepareto
