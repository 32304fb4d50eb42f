#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "builders.hpp"
#include "emview/em/params.hpp"
#include "emview/em/scripts.hpp"
#include "emview/error.hpp"
#include "emview/eval.hpp"
#include "emview/random.hpp"
#include "oracles.hpp"

namespace emview {
namespace {

using testing::make_relation;
using testing::make_typed;

Value I(std::int64_t v) { return Value(v); }

Relation edges(const std::vector<std::pair<std::int64_t, std::int64_t>>& es) {
  std::vector<Row> rows;
  for (const auto& [f, t] : es) rows.push_back({I(f), I(t)});
  return make_typed({{"f", CellType::integer()}, {"t", CellType::integer()}}, rows);
}

std::set<std::pair<std::int64_t, std::int64_t>> pairs_of(const Relation& r) {
  std::set<std::pair<std::int64_t, std::int64_t>> out;
  for (const auto& row : r.rows()) out.emplace(row[0].as_int(), row[1].as_int());
  return out;
}

constexpr const char* kCounter = "with r(n) as ((select 0) union all (select n + 1 from r)) select * from r";

Catalog gmm_catalog(const std::vector<DenseVector>& xs, const em::GmmParams& init) {
  em::Dataset ds;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    ds.ids.push_back(I(static_cast<std::int64_t>(i + 1)));
    ds.x.push_back(xs[i]);
  }
  Catalog cat;
  cat.put("x", em::points_relation(ds));
  cat.put("init_para", init.to_relation());
  cat.params.insert_or_assign("n", Value(static_cast<double>(xs.size())));
  return cat;
}

std::vector<DenseVector> two_blobs(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<DenseVector> xs;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = i % 2 == 0 ? -3.0 : 3.0;
    xs.push_back(DenseVector{c + rng.normal(), 0.5 * c + rng.normal()});
  }
  return xs;
}

em::GmmParams two_blob_init() {
  return testing::gmm({{1, 0.5, DenseVector{-1.0, 0.0}, DenseMatrix::identity(2)},
                       {2, 0.5, DenseVector{1.0, 0.0}, DenseMatrix::identity(2)}});
}

TEST(Evaluate, TransitiveClosureOfPath) {
  Catalog cat;
  cat.put("e", edges({{1, 2}, {2, 3}}));
  const EvalResult res = run_script(em::script("transitive_closure"), cat);
  EXPECT_EQ(pairs_of(res.result), (std::set<std::pair<std::int64_t, std::int64_t>>{{1, 2}, {2, 3}, {1, 3}}));
  EXPECT_EQ(res.trace.iterations.size(), 2u);
  EXPECT_EQ(res.trace.exit, ExitReason::Fixpoint);
  EXPECT_TRUE(res.trace.iterations[0].changed);
  EXPECT_FALSE(res.trace.iterations[1].changed);
}

TEST(Evaluate, CounterStopsAtBound) {
  EvalOptions opts;
  opts.max_recursion = 5;
  const EvalResult res = run_script(kCounter, Catalog{}, opts);
  std::set<std::int64_t> got;
  for (const auto& row : res.result.rows()) got.insert(row[0].as_int());
  EXPECT_EQ(got, (std::set<std::int64_t>{0, 1, 2, 3, 4, 5}));
  EXPECT_EQ(res.trace.exit, ExitReason::MaxRecursion);
  EXPECT_EQ(res.trace.iterations.size(), 5u);
}

TEST(Evaluate, StatementBoundAndDefault) {
  const EvalResult bounded = run_script(
      "with r(n) as ((select 0) union all (select n + 1 from r) maxrecursion 3) select * from r", Catalog{});
  EXPECT_EQ(bounded.result.size(), 4u);
  const EvalResult dflt = run_script(kCounter, Catalog{});
  EXPECT_EQ(dflt.trace.iterations.size(), 100u);
  EXPECT_EQ(dflt.result.size(), 101u);
}

TEST(Evaluate, EmptyStepExits) {
  const EvalResult res =
      run_script("with r(n) as ((select 0) union all (select n + 1 from r where n > 10)) select * from r", Catalog{});
  EXPECT_EQ(res.trace.exit, ExitReason::EmptyStep);
  ASSERT_EQ(res.trace.iterations.size(), 1u);
  EXPECT_FALSE(res.trace.iterations[0].changed);
  EXPECT_EQ(res.result.size(), 1u);
}

TEST(Evaluate, GaussianMixtureRunsExactlyTenIterations) {
  const Catalog cat = gmm_catalog(two_blobs(60, 3), two_blob_init());
  const EvalResult res = run_script(em::script("gmm"), cat);
  EXPECT_EQ(res.trace.iterations.size(), 10u);
  EXPECT_EQ(res.trace.exit, ExitReason::MaxRecursion);
  EXPECT_EQ(res.result.schema().names(), (std::vector<std::string>{"k", "pie", "mean", "cov"}));
  ASSERT_EQ(res.result.size(), 2u);
  std::set<std::int64_t> keys;
  for (const auto& row : res.result.rows()) keys.insert(row[0].as_int());
  EXPECT_EQ(keys.size(), 2u);
}

TEST(Evaluate, GaussianMixtureMatchesReferenceEm) {
  const auto xs = two_blobs(40, 5);
  const em::GmmParams init = two_blob_init();
  EvalOptions opts;
  opts.max_recursion = 5;
  const EvalResult res = run_script(em::script("gmm"), gmm_catalog(xs, init), opts);
  auto g = oracle::from_params(init);
  const auto ex = oracle::to_eigen(xs);
  for (int t = 0; t < 5; ++t) g = oracle::em_step(g, ex);
  EXPECT_LE(oracle::max_deviation(em::GmmParams::from_relation(res.result), g), 1e-9);
}

TEST(Evaluate, ErrorsCarryIterationIndex) {
  Catalog cat;
  cat.put("t", make_relation({"v"}, {{Value(2.0)}}));
  try {
    run_script("with r(v) as ((select v from t) union all (select v - 1 from r where v > 0.5) ) "
               "select 1 / (v - 1) from r",
               cat);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFinite);
  }
  try {
    run_script("with r(v) as ((select v from t) union all (select sqrt(v - 3) from r)) select * from r", cat);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFinite);
    EXPECT_NE(std::string(e.what()).find("iteration 1"), std::string::npos) << e.what();
  }
}

TEST(Evaluate, MissingBaseRelation) {
  try {
    run_script(em::script("transitive_closure"), Catalog{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownRelation);
  }
}

TEST(Evaluate, PlainSelectIsNotRecursive) {
  Catalog cat;
  cat.put("e", edges({{1, 2}, {2, 3}}));
  const EvalResult res = run_script("select f from e where t = 3", cat);
  EXPECT_EQ(res.trace.exit, ExitReason::NotRecursive);
  EXPECT_TRUE(res.trace.iterations.empty());
  ASSERT_EQ(res.result.size(), 1u);
  EXPECT_EQ(res.result.row(0)[0], I(2));
}

TEST(Resume, SplitRunEqualsSingleRun) {
  const Catalog cat = gmm_catalog(two_blobs(50, 7), two_blob_init());
  const CompiledScript s = compile(em::script("gmm"), cat);
  EvalOptions twenty;
  twenty.max_recursion = 20;
  EvalOptions ten;
  ten.max_recursion = 10;
  const EvalResult whole = evaluate(s.plan, cat, twenty);
  const EvalResult first = evaluate(s.plan, cat, ten);
  const EvalResult second = evaluate_resumable(s.plan, cat, first.recursive, ten);
  EXPECT_TRUE(same_rows(whole.recursive, second.recursive));
}

TEST(Resume, ConvergedModelReachesFixpointQuickly) {
  const Catalog cat = gmm_catalog(two_blobs(50, 8), two_blob_init());
  const CompiledScript s = compile(em::script("gmm"), cat);
  EvalOptions opts;
  opts.max_recursion = 2000;
  const EvalResult converged = evaluate(s.plan, cat, opts);
  if (converged.trace.exit != ExitReason::Fixpoint) GTEST_SKIP() << "did not converge bitwise";
  const EvalResult again = evaluate_resumable(s.plan, cat, converged.recursive, opts);
  EXPECT_LE(again.trace.iterations.size(), 2u);
  EXPECT_EQ(again.trace.exit, ExitReason::Fixpoint);
}

TEST(Resume, FullClosureIsImmediateFixpoint) {
  Catalog cat;
  cat.put("e", edges({{1, 2}, {2, 3}, {3, 4}}));
  const CompiledScript s = compile(em::script("transitive_closure"), cat);
  const EvalResult full = evaluate(s.plan, cat);
  const EvalResult again = evaluate_resumable(s.plan, cat, full.recursive);
  ASSERT_EQ(again.trace.iterations.size(), 1u);
  EXPECT_FALSE(again.trace.iterations[0].changed);
  EXPECT_EQ(again.trace.exit, ExitReason::Fixpoint);
}

TEST(Resume, FromInitialRelationMatchesEvaluate) {
  Catalog cat;
  cat.put("e", edges({{1, 2}, {2, 3}, {3, 1}, {3, 5}}));
  const CompiledScript s = compile(em::script("transitive_closure"), cat);
  const EvalResult a = evaluate(s.plan, cat);
  const EvalResult b = evaluate_resumable(s.plan, cat, execute(*s.plan.init, cat));
  EXPECT_TRUE(same_rows(a.result, b.result));
  ASSERT_EQ(a.trace.iterations.size(), b.trace.iterations.size());
  for (std::size_t i = 0; i < a.trace.iterations.size(); ++i) {
    EXPECT_EQ(a.trace.iterations[i].rows, b.trace.iterations[i].rows);
    EXPECT_EQ(a.trace.iterations[i].changed, b.trace.iterations[i].changed);
  }
  EXPECT_EQ(a.trace.exit, b.trace.exit);
}

TEST(Resume, SchemaMismatch) {
  Catalog cat;
  cat.put("e", edges({{1, 2}}));
  const CompiledScript s = compile(em::script("transitive_closure"), cat);
  try {
    evaluate_resumable(s.plan, cat, make_relation({"a"}, {{I(1)}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SchemaMismatch);
  }
}

TEST(Properties, ClosureMatchesBreadthFirstSearch) {
  Rng rng(41);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t nodes = 2 + rng.index(14);
    std::vector<std::pair<std::int64_t, std::int64_t>> es;
    for (std::size_t f = 0; f < nodes; ++f) {
      for (std::size_t t = 0; t < nodes; ++t) {
        if (rng.uniform() < 0.15) es.emplace_back(static_cast<std::int64_t>(f), static_cast<std::int64_t>(t));
      }
    }
    Catalog cat;
    cat.put("e", edges(es));
    const EvalResult res = run_script(em::script("transitive_closure"), cat);
    EXPECT_EQ(pairs_of(res.result), oracle::bfs_closure(es)) << "trial " << trial;
    EXPECT_NE(res.trace.exit, ExitReason::MaxRecursion);
  }
}

TEST(Properties, UnionAllIsInflationary) {
  Catalog cat;
  Rng rng(42);
  std::vector<std::pair<std::int64_t, std::int64_t>> es;
  for (int i = 0; i < 30; ++i) es.emplace_back(rng.index(12), rng.index(12));
  cat.put("e", edges(es));
  std::vector<Relation> history;
  EvalOptions opts;
  opts.on_iteration = [&](std::int64_t, const Relation& r) -> std::optional<Relation> {
    history.push_back(r);
    return std::nullopt;
  };
  const CompiledScript s = compile(em::script("transitive_closure"), cat);
  history.push_back(execute(*s.plan.init, cat));
  evaluate(s.plan, cat, opts);
  for (std::size_t t = 1; t < history.size(); ++t) {
    const auto before = pairs_of(history[t - 1]);
    const auto after = pairs_of(history[t]);
    EXPECT_TRUE(std::includes(after.begin(), after.end(), before.begin(), before.end()));
  }
}

TEST(Properties, UnionByUpdateStaysKeyUnique) {
  const Catalog cat = gmm_catalog(two_blobs(30, 9), two_blob_init());
  EvalOptions opts;
  opts.on_iteration = [&](std::int64_t, const Relation& r) -> std::optional<Relation> {
    std::set<std::int64_t> keys;
    for (const auto& row : r.rows()) EXPECT_TRUE(keys.insert(row[0].as_int()).second);
    EXPECT_EQ(r.size(), 2u);
    return std::nullopt;
  };
  run_script(em::script("gmm"), cat, opts);
}

TEST(Properties, HookReplacementFeedsNextIteration) {
  EvalOptions opts;
  opts.max_recursion = 4;
  opts.on_iteration = [](std::int64_t t, const Relation& r) -> std::optional<Relation> {
    if (t == 2) return make_relation({"n"}, {{I(100)}});
    return std::nullopt;
  };
  const EvalResult res = run_script(kCounter, Catalog{}, opts);
  std::set<std::int64_t> got;
  for (const auto& row : res.result.rows()) got.insert(row[0].as_int());
  EXPECT_EQ(got, (std::set<std::int64_t>{100, 101, 102}));
}

TEST(Properties, TraceInvariants) {
  Rng rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    Catalog cat;
    std::vector<std::pair<std::int64_t, std::int64_t>> es;
    for (int i = 0; i < 20; ++i) es.emplace_back(rng.index(10), rng.index(10));
    cat.put("e", edges(es));
    EvalOptions opts;
    opts.max_recursion = 1 + static_cast<std::int64_t>(rng.index(6));
    const EvalResult res = run_script(em::script("transitive_closure"), cat, opts);
    const auto& its = res.trace.iterations;
    ASSERT_FALSE(its.empty());
    EXPECT_LE(static_cast<std::int64_t>(its.size()), *opts.max_recursion);
    for (std::size_t i = 0; i < its.size(); ++i) {
      EXPECT_EQ(its[i].iteration, static_cast<std::int64_t>(i + 1));
      EXPECT_GE(its[i].millis, 0.0);
      if (i + 1 < its.size()) EXPECT_TRUE(its[i].changed);
    }
    if (res.trace.exit == ExitReason::Fixpoint) EXPECT_FALSE(its.back().changed);
    if (res.trace.exit == ExitReason::MaxRecursion) {
      EXPECT_EQ(static_cast<std::int64_t>(its.size()), *opts.max_recursion);
      EXPECT_TRUE(its.back().changed);
    }
  }
}

TEST(Trace, CsvExport) {
  Catalog cat;
  cat.put("e", edges({{1, 2}, {2, 3}}));
  const EvalResult res = run_script(em::script("transitive_closure"), cat);
  std::ostringstream out;
  res.trace.write_csv(out);
  const std::string csv = out.str();
  EXPECT_EQ(csv.rfind("iteration,rows,changed,millis\n", 0), 0u);
  EXPECT_NE(csv.find("\n1,3,1,"), std::string::npos) << csv;
  EXPECT_NE(csv.find("\n2,3,0,"), std::string::npos) << csv;
}

}  // namespace
}  // namespace emview
