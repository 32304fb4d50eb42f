// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "builders.hpp"
#include "emview/em/inference.hpp"
#include "emview/em/params.hpp"
#include "emview/em/scripts.hpp"
#include "emview/em/train.hpp"
#include "emview/error.hpp"
#include "emview/eval.hpp"
#include "emview/maintenance.hpp"
#include "emview/operators.hpp"
#include "emview/random.hpp"
#include "emview/sql/parser.hpp"
#include "emview/sql/validate.hpp"
#include "emview/stats.hpp"
#include "emview/synthetic.hpp"
#include "oracles.hpp"

namespace emview {
namespace {

using Clock = std::chrono::steady_clock;
using em::GmmParams;
using em::TrainConfig;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Value I(std::int64_t v) { return Value(v); }

Relation blobs(std::size_t n, std::size_t d, std::size_t k, std::uint64_t seed) {
  synth::SyntheticSpec spec;
  spec.n = n;
  spec.d = d;
  spec.components = k;
  spec.seed = seed;
  return synth::gaussian_mixture(spec);
}

Relation lines(std::size_t n, std::size_t d, std::size_t k, std::uint64_t seed) {
  synth::SyntheticSpec spec;
  spec.generator = synth::Generator::LinearMixture;
  spec.n = n;
  spec.d = d;
  spec.components = k;
  spec.seed = seed;
  return synth::linear_mixture(spec);
}

TrainConfig provided(const Relation& init, std::int64_t iterations) {
  TrainConfig cfg;
  cfg.components = init.size();
  cfg.max_iterations = iterations;
  cfg.init = init;
  return cfg;
}

// 1. Oracle equivalence

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  const Relation x = blobs(200, 2, 3, 11);
  TrainConfig cfg;
  cfg.components = 3;
  cfg.seed = 5;
  const GmmParams init = em::initial_gmm(em::dataset_of(x), cfg);
  auto g = oracle::from_params(init);
  const auto xs = oracle::to_eigen(em::dataset_of(x).x);
  double worst = 0.0;
  for (std::int64_t t = 1; t <= 15; ++t) {
    g = oracle::em_step(g, xs);
    const auto res = em::train_gmm(x, provided(init.to_relation(), t));
    if (res.iterations() != static_cast<std::size_t>(t)) return {false, fmt("run of %lld stopped early", (long long)t)};
    worst = std::max(worst, oracle::max_deviation(res.params, g));
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-8 && secs < 10.0, fmt("max deviation %.3g over 15 iterations, %.2f s", worst, secs)};
}

// 2. EM ascent

struct Separation {
  bool well_separated = false;
  double ratio = 0.0;
};

// Ratio of the closest pair of label means to the largest per-label spread.
Separation separation_of(const Relation& data) {
  const em::Dataset ds = em::dataset_of(data);
  std::map<std::int64_t, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < data.size(); ++i) by_label[data.at(i, "label").as_int()].push_back(i);
  const std::size_t d = ds.dim();
  std::vector<std::vector<double>> means;
  double spread = 0.0;
  for (const auto& [label, idx] : by_label) {
    std::vector<double> m(d, 0.0);
    for (auto i : idx) {
      for (std::size_t j = 0; j < d; ++j) m[j] += ds.x[i][j] / static_cast<double>(idx.size());
    }
    for (std::size_t j = 0; j < d; ++j) {
      double v = 0.0;
      for (auto i : idx) v += (ds.x[i][j] - m[j]) * (ds.x[i][j] - m[j]);
      spread = std::max(spread, std::sqrt(v / static_cast<double>(idx.size())));
    }
    means.push_back(std::move(m));
  }
  double closest = INFINITY;
  for (std::size_t a = 0; a < means.size(); ++a) {
    for (std::size_t b = a + 1; b < means.size(); ++b) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s += (means[a][j] - means[b][j]) * (means[a][j] - means[b][j]);
      closest = std::min(closest, std::sqrt(s));
    }
  }
  const double ratio = closest / spread;
  return {ratio >= 6.0, ratio};
}

bool ascends(const std::vector<double>& ll) {
  for (std::size_t t = 1; t < ll.size(); ++t) {
    if (ll[t] - ll[t - 1] < -1e-8) return false;
  }
  return true;
}

Outcome em_ascent() {
  const std::size_t ks[] = {2, 4, 8};
  std::size_t gmm_ok = 0, mlr_ok = 0, separated = 0, fast = 0;
  std::string violations;
  for (std::uint64_t run = 0; run < 50; ++run) {
    const std::size_t d = 1 + run % 3;
    const std::size_t k = ks[(run / 3) % 3];
    const std::uint64_t seed = 1000 + run;
    TrainConfig cfg;
    cfg.components = k;
    cfg.seed = seed;
    cfg.max_iterations = 20;

    const Relation x = blobs(500, d, k, seed);
    const auto g = em::train_gmm(x, cfg);
    if (ascends(g.log_likelihood)) {
      ++gmm_ok;
    } else {
      violations += fmt(" gmm run %zu (d=%zu, K=%zu)", static_cast<std::size_t>(run), d, k);
    }
    if (separation_of(x).well_separated) {
      ++separated;
      for (std::size_t t = 1; t <= 5 && t < g.log_likelihood.size(); ++t) {
        if (std::abs(g.log_likelihood[t] - g.log_likelihood[t - 1]) < 1e-4) {
          ++fast;
          break;
        }
      }
    }

    const auto m = em::train_mlr(lines(500, d + 1, k, seed), cfg);
    if (ascends(m.log_likelihood)) {
      ++mlr_ok;
    } else {
      violations += fmt(" mlr run %zu (d=%zu, K=%zu)", static_cast<std::size_t>(run), d, k);
    }
  }
  const bool fast_ok = separated > 0 && 5 * fast >= 4 * separated;
  return {gmm_ok == 50 && mlr_ok == 50 && fast_ok,
          fmt("ascent gmm %zu/50, mlr %zu/50; converged within 5 iterations in %zu/%zu well-separated runs", gmm_ok,
              mlr_ok, fast, separated) +
              (violations.empty() ? "" : "; descent in" + violations)};
}

// 3. Recursion semantics

Relation edges(const std::vector<std::pair<std::int64_t, std::int64_t>>& es) {
  std::vector<Row> rows;
  for (auto [f, t] : es) rows.push_back({I(f), I(t)});
  return testing::make_typed({{"f", CellType::integer()}, {"t", CellType::integer()}}, rows);
}

Outcome recursion_semantics() {
  Rng rng(3);
  std::size_t agree = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t nodes = 1 + rng.index(15);
    const std::size_t m = rng.index(2 * nodes + 1);
    std::set<std::pair<std::int64_t, std::int64_t>> edge_set;
    for (std::size_t i = 0; i < m; ++i) {
      edge_set.emplace(static_cast<std::int64_t>(rng.index(nodes)), static_cast<std::int64_t>(rng.index(nodes)));
    }
    const std::vector<std::pair<std::int64_t, std::int64_t>> es(edge_set.begin(), edge_set.end());
    Catalog cat;
    cat.put("e", edges(es));
    const Relation got = run_script(em::script("transitive_closure"), cat).result;
    std::set<std::pair<std::int64_t, std::int64_t>> pairs;
    for (const auto& row : got.rows()) pairs.emplace(row[0].as_int(), row[1].as_int());
    agree += pairs == oracle::bfs_closure(es) && pairs.size() == got.size();
  }

  std::size_t halted = 0;
  const std::int64_t bounds[] = {1, 7, 25, 100};
  for (std::int64_t n : bounds) {
    const std::string src = n == 100 ? "with R(n) as ((select 0) union all (select n+1 from R)) select * from R"
                                     : "with R(n) as ((select 0) union all (select n+1 from R) maxrecursion " +
                                           std::to_string(n) + ") select * from R";
    const EvalResult res = run_script(src, Catalog{});
    std::set<std::int64_t> values;
    for (const auto& row : res.result.rows()) values.insert(row[0].as_int());
    std::set<std::int64_t> expect;
    for (std::int64_t v = 0; v <= n; ++v) expect.insert(v);
    halted += res.trace.exit == ExitReason::MaxRecursion &&
              res.trace.iterations.size() == static_cast<std::size_t>(n) && values == expect &&
              res.result.size() == expect.size();
  }
  return {agree == 100 && halted == 4,
          fmt("closure equals BFS on %zu/100 digraphs; infinite recursion halted exactly at the bound in %zu/4 cases",
              agree, halted)};
}

// 4. Union-by-update law

Value random_cell(const CellType& t, Rng& rng) {
  switch (t.type) {
    case ValueType::Int:
      return Value(static_cast<std::int64_t>(rng.index(5)));
    case ValueType::Real:
      return Value(rng.uniform(-1.0, 1.0));
    case ValueType::Text:
      return Value("v" + std::to_string(rng.index(4)));
    default: {
      DenseVector v(t.rows);
      for (std::size_t i = 0; i < t.rows; ++i) v[i] = rng.uniform(-1.0, 1.0);
      return Value(std::move(v));
    }
  }
}

Relation keyed(const Schema& schema, std::size_t key_range, double keep, Rng& rng) {
  std::vector<Row> rows;
  std::vector<std::int64_t> keys(key_range);
  for (std::size_t i = 0; i < key_range; ++i) keys[i] = static_cast<std::int64_t>(i);
  rng.shuffle(std::span<std::int64_t>(keys));
  for (auto k : keys) {
    if (rng.uniform() >= keep) continue;
    Row row{I(k)};
    for (std::size_t c = 1; c < schema.size(); ++c) row.push_back(random_cell(schema[c].type, rng));
    rows.push_back(std::move(row));
  }
  return Relation(schema, std::move(rows));
}

Outcome union_by_update_law() {
  Rng rng(4);
  const std::vector<Schema> schemas{
      Schema({{"k", CellType::integer()}, {"v", CellType::real()}}),
      Schema({{"k", CellType::integer()}, {"s", CellType::text()}, {"w", CellType::integer()}}),
      Schema({{"k", CellType::integer()}, {"x", CellType::vector(3)}}),
  };
  std::size_t exact = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Schema& schema = schemas[trial % schemas.size()];
    const std::size_t range = 1 + rng.index(30);
    const Relation r = keyed(schema, range, rng.uniform(), rng);
    const Relation s = keyed(schema, range, rng.uniform(), rng);
    const Relation got = union_by_update(r, s, {"k"});
    const Relation expect = union_all(difference(r, semijoin(r, s, {{"k", "k"}})), s);
    exact += same_rows(got, expect);
  }
  return {exact == 1000, fmt("%zu/1000 random pairs equal the primitive-operator form exactly", exact)};
}

// 5. Linear-algebra joins

Relation sparse_matrix(std::size_t rows, std::size_t cols, double density, Rng& rng) {
  std::vector<Row> out;
  for (std::size_t i = 1; i <= rows; ++i) {
    for (std::size_t j = 1; j <= cols; ++j) {
      if (rng.uniform() < density) {
        out.push_back({I(static_cast<std::int64_t>(i)), I(static_cast<std::int64_t>(j)), Value(rng.uniform(-5.0, 5.0))});
      }
    }
  }
  return testing::make_typed({{"f", CellType::integer()}, {"t", CellType::integer()}, {"val", CellType::real()}},
                             std::move(out));
}

Relation sparse_vector(std::size_t n, double density, Rng& rng, oracle::Vec& dense) {
  dense = oracle::Vec::Zero(static_cast<Eigen::Index>(n));
  std::vector<Row> out;
  for (std::size_t i = 1; i <= n; ++i) {
    if (rng.uniform() < density) {
      const double v = rng.uniform(-5.0, 5.0);
      dense(static_cast<Eigen::Index>(i - 1)) = v;
      out.push_back({I(static_cast<std::int64_t>(i)), Value(v)});
    }
  }
  return testing::make_typed({{"id", CellType::integer()}, {"v", CellType::real()}}, std::move(out));
}

double vector_error(const Relation& got, const oracle::Vec& expect) {
  double err = 0.0;
  std::set<std::int64_t> seen;
  for (const auto& row : got.rows()) {
    const std::int64_t f = row[0].as_int();
    if (f < 1 || f > expect.size() || !seen.insert(f).second) return INFINITY;
    err = std::max(err, std::abs(row[1].as_real() - expect(f - 1)));
  }
  for (Eigen::Index f = 1; f <= expect.size(); ++f) {
    if (!seen.contains(f)) err = std::max(err, std::abs(expect(f - 1)));
  }
  return err;
}

Outcome linear_algebra_joins() {
  Rng rng(5);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t r = 1 + rng.index(6), m = 1 + rng.index(6), c = 1 + rng.index(6);
    const double density = rng.uniform(0.1, 0.9);
    const Relation a = sparse_matrix(r, m, density, rng);
    const oracle::Mat da = oracle::dense(a, r, m);

    oracle::Vec dv;
    const Relation v = sparse_vector(m, density, rng, dv);
    worst = std::max(worst, vector_error(mv_join(a, v), da * dv));

    const Relation b = sparse_matrix(m, c, density, rng);
    const oracle::Mat prod = da * oracle::dense(b, m, c);
    worst = std::max(worst, (oracle::dense(mm_join(a, b), r, c) - prod).cwiseAbs().maxCoeff());

    const Relation a2 = sparse_matrix(r, m, density, rng);
    const oracle::Vec had = da.cwiseProduct(oracle::dense(a2, r, m)).rowwise().sum();
    worst = std::max(worst, vector_error(elementwise_join(a, a2), had));
  }
  return {worst <= 1e-12, fmt("max abs error %.3g over 500 random sparse matrices", worst)};
}

// 6. Scaling shape

double r_squared(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy * sxy / (sxx * syy);
}

struct TimedRun {
  Relation data;
  Relation init;
  std::vector<double> seconds;
};

TimedRun prepare_run(std::size_t n, std::size_t k) {
  TimedRun r;
  r.data = blobs(n, 10, k, 60 + k);
  TrainConfig cfg;
  cfg.components = k;
  cfg.seed = 7;
  r.init = em::initial_gmm(em::dataset_of(r.data), cfg).to_relation();
  return r;
}

// Per-iteration wall time of a fixed-init GMM run.
double time_once(const TimedRun& r) {
  const auto res = em::train_gmm(r.data, provided(r.init, 3));
  double ms = 0.0;
  for (const auto& it : res.trace.iterations) ms += it.millis;
  return ms / 1000.0 / static_cast<double>(res.iterations());
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

// Repeats are interleaved across configurations so drift affects all of them alike.
Outcome scaling_shape() {
  const auto t0 = Clock::now();
  const std::vector<double> ns{5000, 10000, 20000};
  const std::vector<double> ks{4, 8, 16};
  std::vector<TimedRun> by_n, by_k;
  for (double n : ns) by_n.push_back(prepare_run(static_cast<std::size_t>(n), 8));
  for (double k : ks) by_k.push_back(prepare_run(5000, static_cast<std::size_t>(k)));
  time_once(by_n.front());
  for (int rep = 0; rep < 5; ++rep) {
    for (auto& r : by_n) r.seconds.push_back(time_once(r));
    for (auto& r : by_k) r.seconds.push_back(time_once(r));
  }
  std::vector<double> tn, tk;
  for (const auto& r : by_n) tn.push_back(median(r.seconds));
  for (const auto& r : by_k) tk.push_back(median(r.seconds));
  const double rn = r_squared(ns, tn), rk = r_squared(ks, tk);
  const double secs = seconds_since(t0);
  return {rn > 0.98 && rk > 0.98 && secs < 300.0,
          fmt("R^2 in n %.4f (%.3f/%.3f/%.3f s), in K %.4f (%.3f/%.3f/%.3f s), %.0f s total", rn, tn[0], tn[1], tn[2],
              rk, tk[0], tk[1], tk[2], secs)};
}

// 7. Maintenance consistency

Relation with_ids(const em::Dataset& ds, std::size_t from, std::size_t to) {
  em::Dataset part;
  for (std::size_t i = from; i < to; ++i) {
    part.ids.push_back(ds.ids[i]);
    part.x.push_back(ds.x[i]);
  }
  return em::points_relation(part);
}

Relation empty_points(std::size_t d) {
  return testing::make_typed({{"id", CellType::integer()}, {"x", CellType::vector(d)}}, {});
}

double stats_deviation(const maint::SuffStats& a, const maint::SuffStats& b) {
  double m = std::abs(a.n - b.n);
  for (std::size_t k = 0; k < a.size(); ++k) {
    const auto& x = a.components[k];
    const auto& y = b.components[k];
    m = std::max(m, std::abs(x.nk - y.nk));
    for (std::size_t i = 0; i < x.s1.size(); ++i) m = std::max(m, std::abs(x.s1[i] - y.s1[i]));
    for (std::size_t i = 0; i < x.s2.rows(); ++i) {
      for (std::size_t j = 0; j < x.s2.cols(); ++j) m = std::max(m, std::abs(x.s2(i, j) - y.s2(i, j)));
    }
  }
  return m;
}

// L∞ distance under the best matching of components.
double matched_deviation(const GmmParams& a, const GmmParams& b) {
  std::vector<std::size_t> perm(b.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  double best = INFINITY;
  do {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      const auto& x = a.components[k];
      const auto& y = b.components[perm[k]];
      m = std::max(m, std::abs(x.pie - y.pie));
      for (std::size_t i = 0; i < x.mean.size(); ++i) m = std::max(m, std::abs(x.mean[i] - y.mean[i]));
      for (std::size_t i = 0; i < x.cov.rows(); ++i) {
        for (std::size_t j = 0; j < x.cov.cols(); ++j) m = std::max(m, std::abs(x.cov(i, j) - y.cov(i, j)));
      }
    }
    best = std::min(best, m);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Two tight blobs with means spread over [0, 20]^2; 1900 rows form the table and 100 are inserted.
Outcome maintenance_consistency() {
  const std::size_t n = 2000, staged = 1900, d = 2;
  std::size_t noop = 0, restored = 0, improved = 0, near_batch = 0;
  double worst_restore = 0.0, worst_batch = 0.0, worst_drop = 0.0;
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    synth::SyntheticSpec spec;
    spec.n = n;
    spec.d = d;
    spec.components = 2;
    spec.seed = 700 + trial;
    spec.hi = 20.0;
    const Relation full = synth::gaussian_mixture(spec);
    const em::Dataset ds = em::dataset_of(full);
    const Relation data = em::points_relation(ds);
    const Relation before = with_ids(ds, 0, staged);
    const Relation inserted = with_ids(ds, staged, n);

    TrainConfig cfg;
    cfg.components = 2;
    cfg.seed = trial + 1;
    cfg.max_iterations = 20;
    cfg.epsilon = 1e-6;
    const GmmParams warm = em::train_gmm(before, cfg).params;
    const maint::SuffStats s = maint::stats_from_model(warm, before);

    // (a) empty insert without passes
    const auto same = maint::model_update(warm, s, empty_points(d), empty_points(d), maint::UpdateOptions{});
    noop += same_rows(same.params.to_relation(), warm.to_relation()) &&
            same_rows(same.stats.to_relation(), s.to_relation());

    // (b) delete then reinsert without passes, both against θ⁽⁰⁾
    Rng pick(trial);
    std::vector<std::size_t> chosen = pick.permutation(staged);
    chosen.resize(50);
    em::Dataset gone;
    for (auto i : chosen) {
      gone.ids.push_back(ds.ids[i]);
      gone.x.push_back(ds.x[i]);
    }
    const Relation gone_rel = em::points_relation(gone);
    const auto down = maint::model_downdate(warm, s, gone_rel, empty_points(d), maint::UpdateOptions{});
    const auto up = maint::model_update(warm, down.stats, gone_rel, gone_rel, maint::UpdateOptions{});
    const double dev = stats_deviation(up.stats, s);
    worst_restore = std::max(worst_restore, dev);
    restored += dev <= 1e-9;

    // (c) full-data refinement
    maint::UpdateOptions opts;
    opts.passes = 5;
    opts.seed = trial + 11;
    const auto upd = maint::model_update(warm, s, data, inserted, opts);
    const double drop = em::log_likelihood(warm, data) - em::log_likelihood(upd.params, data);
    worst_drop = std::max(worst_drop, drop);
    improved += drop <= 1e-6;

    // (d) against batch EM from the same warm start
    TrainConfig batch = provided(warm.to_relation(), 500);
    batch.epsilon = 1e-12;
    const GmmParams retrained = em::train_gmm(data, batch).params;
    const double gap = matched_deviation(upd.params, retrained);
    worst_batch = std::max(worst_batch, gap);
    near_batch += gap <= 1e-2;
  }
  return {noop == 20 && restored == 20 && improved >= 19 && near_batch == 20,
          fmt("(a) no-op %zu/20; (b) restored %zu/20, worst %.3g; (c) no loss %zu/20, worst drop %.3g; "
              "(d) within 1e-2 of batch %zu/20, worst %.3g",
              noop, restored, worst_restore, improved, worst_drop, near_batch, worst_batch)};
}

// 8. Parser corpus

std::optional<ErrorCode> code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

Outcome parser_corpus() {
  std::vector<std::string> failures;
  const std::set<std::string, std::less<>> tables{"x", "xy", "init_para", "e"};
  for (const std::string name : {"gmm", "mlr", "moe", "transitive_closure"}) {
    try {
      const sql::QueryAst q = sql::parse(em::script(name));
      sql::validate(q, tables);
      const std::string printed = sql::pretty_print(q);
      const sql::QueryAst again = sql::parse(printed);
      if (!(again == q) || sql::pretty_print(again) != printed) failures.push_back(name + " round-trip");
    } catch (const std::exception& e) {
      failures.push_back(name + ": " + e.what());
    }
  }

  try {
    TrainConfig cfg;
    cfg.components = 2;
    cfg.max_iterations = 3;
    const Relation x = blobs(60, 2, 2, 8);
    if (!std::isfinite(em::train_gmm(x, cfg).log_likelihood.back())) failures.push_back("gmm evaluation");
    const Relation xy = lines(60, 2, 2, 8);
    if (!std::isfinite(em::train_mlr(xy, cfg).log_likelihood.back())) failures.push_back("mlr evaluation");
    if (!std::isfinite(em::train_moe(xy, cfg).log_likelihood.back())) failures.push_back("moe evaluation");
    Catalog cat;
    cat.put("e", edges({{1, 2}, {2, 3}}));
    if (run_script(em::script("transitive_closure"), cat).result.size() != 3) failures.push_back("closure evaluation");
  } catch (const std::exception& e) {
    failures.push_back(std::string("evaluation: ") + e.what());
  }

  const std::vector<std::pair<std::string, ErrorCode>> rejected{
      {"with r(k, v) as ((select k, v from t) union by update k (select k, v from r) union by update k "
       "(select k, v + 1 from r)) select * from r",
       ErrorCode::MultipleUnionByUpdate},
      {"with r(k, v) as ((select k, v from t) union by update k (select k, v from a "
       "computed by a(k, v) as select k, v from a)) select * from r",
       ErrorCode::RecursiveComputedBy},
      {"with r(k, v) as ((select k, v from t) union by update k (select k, v from a "
       "computed by a(k, v) as select k, v from b b(k, v) as select k, v from a)) select * from r",
       ErrorCode::CyclicComputedBy},
      {"with r(k, v) as ((select k, v from t) union by update k (select k, v from missing)) select * from r",
       ErrorCode::UnknownRelation},
      {"with r(k, v) as ((select k, v from t) union by update z (select k, v from r)) select * from r",
       ErrorCode::InvalidUpdateKey},
  };
  std::size_t caught = 0;
  for (const auto& [src, code] : rejected) {
    const auto got = code_of([&] { sql::validate(sql::parse(src), {"t"}); });
    if (got == code) {
      ++caught;
    } else {
      failures.push_back(std::string("expected ") + std::string(to_string(code)) + ", got " +
                         (got ? std::string(to_string(*got)) : std::string("nothing")));
    }
  }
  std::string detail = fmt("4 scripts parsed, validated, round-tripped and evaluated; %zu/5 validator errors", caught);
  for (const auto& f : failures) detail += "; " + f;
  return {failures.empty(), detail};
}

// 9. Numerical kernels

Outcome numerical_kernels() {
  std::vector<std::string> failures;

  double worst_mass = 0.0;
  for (const auto& [mu, sd] : {std::pair{0.0, 1.0}, std::pair{0.7, 1.3}, std::pair{-4.0, 0.05}, std::pair{10.0, 6.0}}) {
    // Simpson's rule over ±12 standard deviations.
    const int steps = 24000;
    const double a = mu - 12.0 * sd, h = 24.0 * sd / steps;
    double sum = stats::norm_pdf_1d(a, mu, sd) + stats::norm_pdf_1d(a + steps * h, mu, sd);
    for (int i = 1; i < steps; ++i) sum += (i % 2 ? 4.0 : 2.0) * stats::norm_pdf_1d(a + i * h, mu, sd);
    worst_mass = std::max(worst_mass, std::abs(sum * h / 3.0 - 1.0));
  }
  if (worst_mass > 1e-6) failures.push_back(fmt("density mass off by %.3g", worst_mass));

  Rng rng(9);
  double worst_grad = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 20 + rng.index(80), d = 1 + rng.index(5);
    DenseMatrix x(n, d);
    DenseVector y(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) x(i, j) = rng.uniform(-1.0, 1.0);
      y[i] = rng.normal();
      w[i] = rng.uniform();
    }
    const DenseVector beta = stats::least_squares(x, y, w);
    for (std::size_t j = 0; j < d; ++j) {
      double g = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double fit = 0.0;
        for (std::size_t c = 0; c < d; ++c) fit += x(i, c) * beta[c];
        g += x(i, j) * w[i] * (y[i] - fit);
      }
      worst_grad = std::max(worst_grad, std::abs(g));
    }
  }
  if (worst_grad > 1e-8) failures.push_back(fmt("residual not orthogonal: %.3g", worst_grad));

  std::size_t equivariant = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 2 + rng.index(8), d = 1 + rng.index(4);
    DenseVector x(d);
    for (std::size_t j = 0; j < d; ++j) x[j] = rng.uniform(-3.0, 3.0);
    std::vector<DenseVector> thetas;
    for (std::size_t c = 0; c < k; ++c) {
      DenseVector t(d);
      for (std::size_t j = 0; j < d; ++j) t[j] = rng.uniform(-3.0, 3.0);
      thetas.push_back(std::move(t));
    }
    const auto base = stats::softmax_gate(x, thetas);
    const auto perm = rng.permutation(k);
    std::vector<DenseVector> permuted;
    for (auto i : perm) permuted.push_back(thetas[i]);
    const auto g = stats::softmax_gate(x, permuted);
    bool same = true;
    for (std::size_t c = 0; c < k; ++c) same = same && g[c] == base[perm[c]];
    equivariant += same;
  }
  if (equivariant != 200) failures.push_back(fmt("softmax equivariant in %zu/200", equivariant));

  double worst_entropy = 0.0;
  for (std::size_t k = 1; k <= 64; ++k) {
    std::vector<double> one_hot(k, 0.0);
    one_hot[k / 2] = 1.0;
    worst_entropy = std::max(worst_entropy, std::abs(stats::entropy(one_hot)));
    const std::vector<double> uniform(k, 1.0 / static_cast<double>(k));
    worst_entropy = std::max(worst_entropy, std::abs(stats::entropy(uniform) - std::log(static_cast<double>(k))));
  }
  if (worst_entropy > 1e-12) failures.push_back(fmt("entropy endpoints off by %.3g", worst_entropy));

  std::string detail = fmt("mass error %.2g, orthogonality %.2g, softmax %zu/200 exact, entropy endpoints %.2g",
                           worst_mass, worst_grad, equivariant, worst_entropy);
  for (const auto& f : failures) detail += "; " + f;
  return {failures.empty(), detail};
}

}  // namespace
}  // namespace emview

// Optional arguments select criteria by number.
int main(int argc, char** argv) {
  using namespace emview;
  std::set<std::size_t> only;
  for (int i = 1; i < argc; ++i) only.insert(static_cast<std::size_t>(std::stoul(argv[i])));
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle equivalence", oracle_equivalence},
      {"EM ascent", em_ascent},
      {"recursion semantics", recursion_semantics},
      {"union-by-update law", union_by_update_law},
      {"linear-algebra joins", linear_algebra_joins},
      {"scaling shape", scaling_shape},
      {"maintenance consistency", maintenance_consistency},
      {"parser corpus", parser_corpus},
      {"numerical kernels", numerical_kernels},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!only.empty() && !only.contains(i + 1)) continue;
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s criterion %zu (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
