// Copyright 2026 The shuffleamp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "shuffleamp/amplifier.h"
#include "shuffleamp/catalog.h"
#include "shuffleamp/gparv.h"
#include "shuffleamp/lattice.h"
#include "shuffleamp/randomizers.h"

namespace shuffleamp {
namespace {

RandomizerSpec Krr(double eps0, int k) {
  RandomizerSpec spec;
  spec.kind = RandomizerKind::kKrr;
  spec.eps0 = eps0;
  spec.k_or_d = k;
  return spec;
}

void BM_SelfConvolve(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  const double eps0 = 1.15;
  const Gparv g = GparvUpper(UpperDecomposition(Krr(eps0, 10)), 0.1, eps0);
  const LatticeDist d = Discretize(g, DefaultStep(eps0), RoundMode::kRoundUp);
  for (auto _ : state) {
    ConvolveStats stats;
    benchmark::DoNotOptimize(SelfConvolve(d, n, &stats));
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_SelfConvolve)->RangeMultiplier(4)->Range(64, 65536)->Complexity();

void BM_DeltaBound(benchmark::State& state) {
  const double eps0 = 1.15;
  const Gparv g = GparvUpper(UpperDecomposition(Krr(eps0, 10)), 0.1, eps0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        DeltaBound(g, state.range(0), DefaultStep(eps0), RoundMode::kRoundUp));
  }
}
BENCHMARK(BM_DeltaBound)->Arg(1000)->Arg(100000);

void BM_DiscretizeLaplace(benchmark::State& state) {
  const double eps0 = 2.0;
  const Gparv g = GparvLaplaceUpper(eps0, 0.2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        Discretize(g, DefaultStep(eps0), RoundMode::kRoundUp));
  }
}
BENCHMARK(BM_DiscretizeLaplace);

void BM_FindEpsilon(benchmark::State& state) {
  AmplificationModel model;
  model.upper = [](double eps0, double eps) {
    return std::vector<Gparv>{
        GparvUpper(UpperDecomposition(Krr(eps0, 10)), eps, eps0)};
  };
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        FindEpsilon([&](double eps) { return model.upper(1.15, eps); }, 1.15,
                    1000, 1e-6, DefaultStep(1.15)));
  }
}
BENCHMARK(BM_FindEpsilon)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace shuffleamp

BENCHMARK_MAIN();
