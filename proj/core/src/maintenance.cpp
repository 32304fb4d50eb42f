#include "emview/maintenance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <unordered_map>

#include "emview/em/inference.hpp"
#include "emview/error.hpp"
#include "emview/operators.hpp"
#include "emview/random.hpp"
#include "emview/stats.hpp"

namespace emview::maint {
namespace {

struct ValueHash {
  std::size_t operator()(const Value& v) const { return v.hash(); }
};

constexpr double kDormant = 1e-9;
constexpr double kNegativeMass = 1e-6;

/// Parameters with their covariance factors, refreshed together.
struct Model {
  em::GmmParams params;
  std::vector<stats::Cholesky> factors;

  explicit Model(em::GmmParams p) : params(std::move(p)) {
    for (const auto& c : params.components) {
      factors.push_back(stats::Cholesky::factor_regularized(c.cov, ErrorCode::NonPositiveDefinite));
    }
  }

  std::vector<double> posterior(const DenseVector& x) const {
    if (x.size() != params.dim()) {
      fail(ErrorCode::DimensionMismatch, "point of dimension " + std::to_string(x.size()) +
                                             " against a model of dimension " + std::to_string(params.dim()));
    }
    std::vector<double> w(params.size());
    double total = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      w[k] = params.components[k].pie * stats::norm_pdf(x, params.components[k].mean, factors[k]);
      total += w[k];
    }
    if (!(total > 0.0)) {
      std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(w.size()));
      return w;
    }
    for (double& v : w) v /= total;
    return w;
  }
};

SuffStats empty_stats(const em::GmmParams& params) {
  SuffStats s;
  const std::size_t d = params.dim();
  for (const auto& c : params.components) s.components.push_back({c.k, 0.0, DenseVector(d), DenseMatrix(d, d)});
  return s;
}

void accumulate(SuffStats& s, const DenseVector& x, const std::vector<double>& p, double sign) {
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double w = sign * p[k];
    if (w == 0.0) continue;
    auto& c = s.components[k];
    c.nk += w;
    for (std::size_t j = 0; j < x.size(); ++j) c.s1[j] += w * x[j];
    add_outer(w, x, c.s2);
  }
}

void check_compatible(const em::GmmParams& params, const SuffStats& s) {
  if (params.size() != s.size()) {
    fail(ErrorCode::DimensionMismatch, "statistics have " + std::to_string(s.size()) + " components, model has " +
                                           std::to_string(params.size()));
  }
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (params.components[k].k != s.components[k].k) {
      fail(ErrorCode::InvalidParameters, "statistics and model disagree on component ids");
    }
  }
  if (params.dim() != s.dim()) fail(ErrorCode::DimensionMismatch, "statistics and model disagree on dimension");
}

em::Dataset points_of(const Relation& r) {
  if (r.empty()) return {};
  return em::dataset_of(r);
}

/// Shuffled passes of Algorithm MODEL_UPDATE over X′, starting from `model`.
void refine(Model& model, const em::GmmParams& original, SuffStats& s, const em::Dataset& xp,
            const UpdateOptions& opts) {
  if (opts.passes == 0 || xp.size() == 0) return;
  const Model start(original);
  std::vector<std::optional<std::vector<double>>> previous(xp.size());
  Rng rng(opts.seed);
  for (std::size_t t = 0; t < opts.passes; ++t) {
    for (std::size_t i : rng.permutation(xp.size())) {
      const DenseVector& x = xp.x[i];
      if (!previous[i]) previous[i] = start.posterior(x);
      std::vector<double> now = model.posterior(x);
      std::vector<double> delta(now.size());
      for (std::size_t k = 0; k < now.size(); ++k) delta[k] = now[k] - (*previous[i])[k];
      accumulate(s, x, delta, 1.0);
      previous[i] = std::move(now);
      model = Model(params_from_stats(s, &model.params, opts.variance_floor));
    }
  }
}

}  // namespace

Relation SuffStats::to_relation() const {
  const std::size_t d = dim();
  Schema schema({{"k", CellType::integer()},
                 {"nk", CellType::real()},
                 {"s1", CellType::vector(d)},
                 {"s2", CellType::matrix(d, d)},
                 {"n", CellType::real()}});
  std::vector<Row> rows;
  for (const auto& c : components) rows.push_back({Value(c.k), Value(c.nk), Value(c.s1), Value(c.s2), Value(n)});
  return Relation(std::move(schema), std::move(rows), std::vector<std::string>{"k"});
}

SuffStats SuffStats::from_relation(const Relation& r) {
  const auto& sc = r.schema();
  const std::size_t ik = sc.index_of("k");
  const std::size_t in = sc.index_of("nk");
  const std::size_t i1 = sc.index_of("s1");
  const std::size_t i2 = sc.index_of("s2");
  const std::size_t itotal = sc.index_of("n");
  SuffStats s;
  for (const Row& row : r.rows()) {
    s.components.push_back({row[ik].as_int(), row[in].as_real(), row[i1].as_vec(), row[i2].as_mat()});
    s.n = row[itotal].as_real();
  }
  std::sort(s.components.begin(), s.components.end(),
            [](const ComponentStats& a, const ComponentStats& b) { return a.k < b.k; });
  return s;
}

SuffStats stats_from_model(const em::GmmParams& params, const em::Dataset& data) {
  const Model model(params);
  SuffStats s = empty_stats(params);
  for (const auto& x : data.x) accumulate(s, x, model.posterior(x), 1.0);
  s.n = static_cast<double>(data.size());
  return s;
}

SuffStats stats_from_model(const em::GmmParams& params, const Relation& data) {
  return stats_from_model(params, points_of(data));
}

SuffStats stats_from_model(const em::GmmParams& params, const Relation& data, const Relation& responsibilities) {
  const em::Dataset ds = points_of(data);
  if (ds.size() > 0 && ds.dim() != params.dim()) {
    fail(ErrorCode::DimensionMismatch, "data dimension " + std::to_string(ds.dim()) + " against model dimension " +
                                           std::to_string(params.dim()));
  }
  std::unordered_map<std::int64_t, std::size_t> slot;
  for (std::size_t k = 0; k < params.size(); ++k) slot[params.components[k].k] = k;
  std::unordered_map<Value, std::vector<double>, ValueHash> resp;
  const auto& rs = responsibilities.schema();
  const std::size_t iid = rs.index_of("id");
  const std::size_t ik = rs.index_of("k");
  const std::size_t ip = rs.index_of("p");
  for (const Row& row : responsibilities.rows()) {
    auto it = slot.find(row[ik].as_int());
    if (it == slot.end()) fail(ErrorCode::InvalidParameters, "responsibility for unknown component " + format_value(row[ik]));
    auto& p = resp[row[iid]];
    p.resize(params.size(), 0.0);
    p[it->second] = row[ip].as_real();
  }
  SuffStats s = empty_stats(params);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    auto it = resp.find(ds.ids[i]);
    if (it == resp.end()) fail(ErrorCode::InvalidArgument, "no responsibilities for id " + format_value(ds.ids[i]));
    accumulate(s, ds.x[i], it->second, 1.0);
  }
  s.n = static_cast<double>(ds.size());
  return s;
}

em::GmmParams params_from_stats(const SuffStats& s, const em::GmmParams* previous, double variance_floor) {
  if (s.size() == 0) fail(ErrorCode::InvalidParameters, "statistics have no components");
  if (!(s.n > 0.0)) fail(ErrorCode::EmptyComponent, "statistics cover no points");
  if (previous && previous->size() != s.size()) {
    fail(ErrorCode::DimensionMismatch, "previous model has a different component count");
  }
  em::GmmParams p;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const auto& c = s.components[k];
    if (c.nk < -kNegativeMass * s.n) {
      fail(ErrorCode::EmptyComponent, "component " + std::to_string(c.k) + " has negative mass " + format_real(c.nk));
    }
    em::GmmComponent out;
    out.k = c.k;
    if (c.nk <= kDormant * s.n) {
      if (!previous) {
        fail(ErrorCode::EmptyComponent, "component " + std::to_string(c.k) + " has no responsibility mass");
      }
      out.pie = std::max(c.nk, 0.0) / s.n;
      out.mean = previous->components[k].mean;
      out.cov = previous->components[k].cov;
      p.components.push_back(std::move(out));
      continue;
    }
    out.pie = c.nk / s.n;
    out.mean = c.s1;
    out.mean *= 1.0 / c.nk;
    DenseMatrix cov = c.s2;
    cov *= 1.0 / c.nk;
    add_outer(-1.0, out.mean, cov);
    out.cov = stats::regularize_covariance(cov, variance_floor);
    p.components.push_back(std::move(out));
  }
  return p;
}

std::string_view to_string(Strategy s) {
  return s == Strategy::Distance ? "distance" : "entropy";
}

Strategy strategy_from_string(std::string_view s) {
  if (s == "distance") return Strategy::Distance;
  if (s == "entropy") return Strategy::Entropy;
  fail(ErrorCode::InvalidArgument, "unknown selection strategy '" + std::string(s) + "'");
}

Relation select_retain_set(const Relation& data, const em::GmmParams& params, const SelectionPolicy& policy) {
  if (policy.budget == 0 || data.empty()) return Relation(data.schema(), {});
  const em::Dataset ds = points_of(data);
  const Model model(params);
  struct Candidate {
    std::size_t row;
    double entropy;
  };
  std::vector<Candidate> keep;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (policy.strategy == Strategy::Distance) {
      std::size_t inside = 0;
      for (std::size_t k = 0; k < params.size(); ++k) {
        if (stats::mahalanobis(ds.x[i], params.components[k].mean, model.factors[k]) <= policy.radius) ++inside;
      }
      if (inside == 1) continue;
    }
    keep.push_back({i, stats::entropy(model.posterior(ds.x[i]))});
  }
  std::stable_sort(keep.begin(), keep.end(), [](const Candidate& a, const Candidate& b) { return a.entropy > b.entropy; });
  if (keep.size() > policy.budget) keep.resize(policy.budget);
  std::sort(keep.begin(), keep.end(), [](const Candidate& a, const Candidate& b) { return a.row < b.row; });
  std::vector<Row> rows;
  for (const auto& c : keep) rows.push_back(data.row(c.row));
  return Relation(data.schema(), std::move(rows));
}

UpdateResult model_update(const em::GmmParams& params, const SuffStats& s, const Relation& x_prime,
                          const Relation& inserted, const UpdateOptions& opts) {
  check_compatible(params, s);
  UpdateResult out{params, s};
  const em::Dataset added = points_of(inserted);
  Model model(params);
  if (added.size() > 0) {
    for (const auto& x : added.x) accumulate(out.stats, x, model.posterior(x), 1.0);
    out.stats.n += static_cast<double>(added.size());
    model = Model(params_from_stats(out.stats, &params, opts.variance_floor));
  }
  refine(model, params, out.stats, points_of(x_prime), opts);
  out.params = model.params;
  return out;
}

UpdateResult model_downdate(const em::GmmParams& params, const SuffStats& s, const Relation& deleted,
                            const Relation& x_prime, const UpdateOptions& opts) {
  check_compatible(params, s);
  UpdateResult out{params, s};
  const em::Dataset removed = points_of(deleted);
  Model model(params);
  if (removed.size() > 0) {
    if (static_cast<double>(removed.size()) > s.n) {
      fail(ErrorCode::InvalidArgument, "deleting " + std::to_string(removed.size()) + " points from statistics of " +
                                           format_real(s.n));
    }
    for (const auto& x : removed.x) accumulate(out.stats, x, model.posterior(x), -1.0);
    out.stats.n -= static_cast<double>(removed.size());
    model = Model(params_from_stats(out.stats, &params, opts.variance_floor));
  }
  refine(model, params, out.stats, points_of(x_prime), opts);
  out.params = model.params;
  return out;
}

struct TriggerSet::State {
  std::mutex mu;
  Relation staged;
  std::optional<SuffStats> stats;
  std::optional<MaintenanceReport> report;
  std::chrono::steady_clock::time_point started;
};

namespace {

std::string trigger_name(const MaintenanceConfig& cfg, std::string_view suffix) {
  return cfg.table + "_" + cfg.view + "_" + std::string(suffix);
}

}  // namespace

TriggerSet::TriggerSet(Database& db, MaintenanceConfig cfg)
    : db_(&db), cfg_(std::move(cfg)), state_(std::make_shared<State>()) {
  if (!db.has(cfg_.table)) fail(ErrorCode::UnknownRelation, "unknown table '" + cfg_.table + "'");
  if (!db.has(cfg_.view)) fail(ErrorCode::UnknownRelation, "unknown view '" + cfg_.view + "'");
  const Relation table = db.get(cfg_.table);
  const em::GmmParams params = em::GmmParams::from_relation(db.get(cfg_.view));
  params.validate();
  if (!table.empty() && em::dataset_of(table).dim() != params.dim()) {
    fail(ErrorCode::DimensionMismatch, "view '" + cfg_.view + "' does not match the dimension of table '" +
                                           cfg_.table + "'");
  }
  if (cfg_.precompute && db.has(stats_table())) {
    state_->stats = SuffStats::from_relation(db.get(stats_table()));
    check_compatible(params, *state_->stats);
  } else if (cfg_.precompute) {
    state_->stats = stats_from_model(params, table);
    db.put(stats_table(), state_->stats->to_relation());
  }

  const MaintenanceConfig c = cfg_;
  auto st = state_;
  const std::string stats_name = stats_table();
  auto finish = [c, st, stats_name](Database& d, TriggerEvent event, std::size_t changed, const UpdateResult& r) {
    d.put(c.view, r.params.to_relation());
    if (c.precompute) {
      st->stats = r.stats;
      d.put(stats_name, r.stats.to_relation());
    }
    MaintenanceReport rep;
    rep.event = event;
    rep.changed_rows = changed;
    rep.staged_rows = st->staged.size();
    rep.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - st->started).count();
    const Relation table = d.get(c.table);
    rep.log_likelihood = table.empty() ? 0.0 : em::log_likelihood(r.params, table);
    st->report = rep;
    st->staged = Relation();
  };

  // T1: select the retained points into X′.
  db.create_trigger({trigger_name(c, "t1"), c.table, TriggerTiming::Before, TriggerEvent::Insert,
                     TriggerGranularity::Statement, [c, st](TriggerContext& ctx) {
                       std::lock_guard lock(st->mu);
                       st->started = std::chrono::steady_clock::now();
                       const Relation table = ctx.db.get(c.table);
                       const auto params = em::GmmParams::from_relation(ctx.db.get(c.view));
                       if (!st->stats) st->stats = stats_from_model(params, table);
                       st->staged = select_retain_set(table, params, c.policy);
                     }});
  // T2: stage each incoming row.
  db.create_trigger({trigger_name(c, "t2"), c.table, TriggerTiming::Before, TriggerEvent::Insert,
                     TriggerGranularity::Row, [st](TriggerContext& ctx) {
                       std::lock_guard lock(st->mu);
                       std::vector<Row> rows(st->staged.rows().begin(), st->staged.rows().end());
                       rows.push_back(*ctx.row);
                       st->staged = Relation(ctx.rows.schema(), std::move(rows));
                     }});
  // T3: MODEL_UPDATE over X′, then clear it.
  db.create_trigger({trigger_name(c, "t3"), c.table, TriggerTiming::After, TriggerEvent::Insert,
                     TriggerGranularity::Statement, [c, st, finish](TriggerContext& ctx) {
                       std::lock_guard lock(st->mu);
                       const auto params = em::GmmParams::from_relation(ctx.db.get(c.view));
                       const SuffStats s = *st->stats;
                       if (!c.precompute) st->stats.reset();
                       const UpdateResult r = model_update(params, s, st->staged, ctx.rows,
                                                           {c.passes, c.seed, c.variance_floor});
                       finish(ctx.db, TriggerEvent::Insert, ctx.rows.size(), r);
                     }});
  // Delete counterparts: select among the surviving rows, then downdate.
  db.create_trigger({trigger_name(c, "t1d"), c.table, TriggerTiming::Before, TriggerEvent::Delete,
                     TriggerGranularity::Statement, [c, st](TriggerContext& ctx) {
                       std::lock_guard lock(st->mu);
                       st->started = std::chrono::steady_clock::now();
                       const Relation table = ctx.db.get(c.table);
                       const auto params = em::GmmParams::from_relation(ctx.db.get(c.view));
                       if (!st->stats) st->stats = stats_from_model(params, table);
                       const Relation survivors = difference(table, ctx.rows);
                       st->staged = select_retain_set(survivors, params, c.policy);
                     }});
  db.create_trigger({trigger_name(c, "t3d"), c.table, TriggerTiming::After, TriggerEvent::Delete,
                     TriggerGranularity::Statement, [c, st, finish](TriggerContext& ctx) {
                       std::lock_guard lock(st->mu);
                       const auto params = em::GmmParams::from_relation(ctx.db.get(c.view));
                       const SuffStats s = *st->stats;
                       if (!c.precompute) st->stats.reset();
                       const UpdateResult r = model_downdate(params, s, ctx.rows, st->staged,
                                                             {c.passes, c.seed, c.variance_floor});
                       finish(ctx.db, TriggerEvent::Delete, ctx.rows.size(), r);
                     }});
  attached_ = true;
}

TriggerSet::~TriggerSet() {
  try {
    detach();
  } catch (...) {
  }
}

std::vector<std::string> TriggerSet::trigger_names() const {
  std::vector<std::string> out;
  for (const char* s : {"t1", "t2", "t3", "t1d", "t3d"}) out.push_back(trigger_name(cfg_, s));
  return out;
}

void TriggerSet::detach() {
  if (!attached_) return;
  for (const auto& name : trigger_names()) db_->drop_trigger(name);
  attached_ = false;
}

std::size_t TriggerSet::staged() const {
  std::lock_guard lock(state_->mu);
  return state_->staged.size();
}

std::optional<MaintenanceReport> TriggerSet::last_report() const {
  std::lock_guard lock(state_->mu);
  return state_->report;
}

std::unique_ptr<TriggerSet> attach_triggers(Database& db, MaintenanceConfig cfg) {
  return std::make_unique<TriggerSet>(db, std::move(cfg));
}

}  // namespace emview::maint
