#include <benchmark/benchmark.h>

#include "emview/maintenance.hpp"
#include "emview/operators.hpp"
#include "emview/random.hpp"
#include "emview/stats.hpp"
#include "emview/synthetic.hpp"

namespace {

using namespace emview;

void BM_NormPdf(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  DenseVector x(d), mean(d);
  DenseMatrix cov(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    x[i] = rng.normal();
    cov(i, i) = 1.0 + rng.uniform();
  }
  for (auto _ : state) benchmark::DoNotOptimize(stats::norm_pdf(x, mean, cov));
}
BENCHMARK(BM_NormPdf)->Arg(2)->Arg(10)->Arg(30);

Relation triples(std::size_t n, std::size_t cols, Rng& rng) {
  Schema s({{"f", CellType::integer()}, {"t", CellType::integer()}, {"val", CellType::real()}});
  std::vector<Row> rows;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      if (rng.uniform() < 0.3) {
        rows.push_back({Value(static_cast<std::int64_t>(i)), Value(static_cast<std::int64_t>(j)), Value(rng.normal())});
      }
    }
  }
  return Relation(std::move(s), std::move(rows));
}

void BM_MmJoin(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(5);
  const Relation a = triples(n, n, rng);
  const Relation b = triples(n, n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(mm_join(a, b));
}
BENCHMARK(BM_MmJoin)->Arg(16)->Arg(64);

void BM_ModelUpdatePass(benchmark::State& state) {
  synth::SyntheticSpec spec;
  spec.n = static_cast<std::size_t>(state.range(0));
  spec.seed = 11;
  const Relation data = synth::gaussian_mixture(spec);
  em::GmmParams p;
  p.components.push_back({1, 0.5, DenseVector{2.0, 2.0}, DenseMatrix{{1.0, 0.0}, {0.0, 1.0}}});
  p.components.push_back({2, 0.5, DenseVector{8.0, 8.0}, DenseMatrix{{1.0, 0.0}, {0.0, 1.0}}});
  const auto s = maint::stats_from_model(p, data);
  const Relation none(data.schema(), {});
  for (auto _ : state) benchmark::DoNotOptimize(maint::model_update(p, s, data, none, {1, 1, 1e-12}));
}
BENCHMARK(BM_ModelUpdatePass)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace
