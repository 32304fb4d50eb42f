#include <benchmark/benchmark.h>

#include "emview/em/train.hpp"
#include "emview/synthetic.hpp"

namespace {

using namespace emview;

Relation blobs(std::size_t n, std::size_t d, std::size_t k) {
  synth::SyntheticSpec spec;
  spec.n = n;
  spec.d = d;
  spec.components = k;
  spec.seed = 7;
  return synth::gaussian_mixture(spec);
}

// Wall time of one EM iteration, taken from the evaluation trace.
void BM_GmmIteration(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const Relation data = blobs(n, 10, k);
  em::TrainConfig cfg;
  cfg.components = k;
  cfg.max_iterations = 2;
  for (auto _ : state) {
    const auto r = em::train_gmm(data, cfg);
    double ms = 0.0;
    for (const auto& it : r.trace.iterations) ms += it.millis;
    state.SetIterationTime(ms / 1000.0 / static_cast<double>(r.trace.iterations.size()));
  }
  state.counters["points"] = static_cast<double>(n);
  state.counters["components"] = static_cast<double>(k);
}
BENCHMARK(BM_GmmIteration)
    ->Args({5000, 8})
    ->Args({10000, 8})
    ->Args({20000, 8})
    ->Args({5000, 4})
    ->Args({5000, 16})
    ->UseManualTime()
    ->Unit(benchmark::kMillisecond)
    ->Iterations(2);

void BM_MlrIteration(benchmark::State& state) {
  synth::SyntheticSpec spec;
  spec.generator = synth::Generator::LinearMixture;
  spec.n = static_cast<std::size_t>(state.range(0));
  spec.d = 4;
  spec.components = 3;
  const Relation data = synth::generate(spec);
  em::TrainConfig cfg;
  cfg.components = 3;
  cfg.max_iterations = 2;
  for (auto _ : state) {
    const auto r = em::train_mlr(data, cfg);
    double ms = 0.0;
    for (const auto& it : r.trace.iterations) ms += it.millis;
    state.SetIterationTime(ms / 1000.0 / static_cast<double>(r.trace.iterations.size()));
  }
}
BENCHMARK(BM_MlrIteration)->Arg(2000)->Arg(8000)->UseManualTime()->Unit(benchmark::kMillisecond)->Iterations(2);

}  // namespace
