#include "emview/em/train.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "emview/em/inference.hpp"
#include "emview/em/scripts.hpp"
#include "emview/error.hpp"
#include "emview/random.hpp"
#include "emview/stats.hpp"

namespace emview::em {

void TrainConfig::validate() const {
  if (components < 1) fail(ErrorCode::InvalidArgument, "component count must be at least 1");
  if (max_iterations < 1) fail(ErrorCode::InvalidArgument, "iteration bound must be positive");
  if (const auto* ru = std::get_if<RandomUniform>(&init)) {
    if (ru->lo.has_value() != ru->hi.has_value()) {
      fail(ErrorCode::InvalidArgument, "initialization range needs both lo and hi");
    }
    if (ru->lo && !(*ru->lo < *ru->hi)) fail(ErrorCode::InvalidArgument, "initialization range needs lo < hi");
  }
  if (epsilon && !(*epsilon > 0.0)) fail(ErrorCode::InvalidArgument, "epsilon must be positive");
}

DenseMatrix sample_covariance(const Dataset& data) {
  const std::size_t d = data.dim();
  DenseVector mean(d);
  for (const auto& x : data.x) mean += x;
  mean *= 1.0 / static_cast<double>(data.size());
  DenseMatrix cov(d, d);
  for (const auto& x : data.x) add_outer(1.0, sub(x, mean), cov);
  cov *= 1.0 / static_cast<double>(data.size());
  return cov;
}

double data_range(const Dataset& data) {
  double range = 0.0;
  for (std::size_t j = 0; j < data.dim(); ++j) {
    double lo = data.x.front()[j];
    double hi = lo;
    for (const auto& x : data.x) {
      lo = std::min(lo, x[j]);
      hi = std::max(hi, x[j]);
    }
    range = std::max(range, hi - lo);
  }
  return range;
}

double sigma_floor(const Dataset& data) {
  if (data.y.empty()) return 1e-12;
  const auto [lo, hi] = std::minmax_element(data.y.begin(), data.y.end());
  return std::max(1e-6 * (*hi - *lo), 1e-12);
}

namespace {

constexpr double kEmptyMass = 1e-8;
constexpr std::uint64_t kRepairStream = 0x9e3779b97f4a7c15ULL;

double variance_floor(const Dataset& data) {
  const double f = 1e-6 * data_range(data);
  return std::max(f * f, 1e-24);
}

double target_std(const Dataset& data) {
  double mean = 0.0;
  for (double y : data.y) mean += y;
  mean /= static_cast<double>(data.y.size());
  double var = 0.0;
  for (double y : data.y) var += (y - mean) * (y - mean);
  return std::sqrt(var / static_cast<double>(data.y.size()));
}

DenseVector ols(const Dataset& data) {
  DenseMatrix design(data.size(), data.dim());
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < data.dim(); ++j) design(i, j) = data.x[i][j];
  }
  return stats::least_squares(design, DenseVector(data.y));
}

std::vector<DenseVector> initial_betas(const Dataset& data, const TrainConfig& cfg, Rng& rng) {
  const auto& ru = std::get<RandomUniform>(cfg.init);
  std::vector<DenseVector> out;
  const DenseVector center = ru.lo ? DenseVector(data.dim()) : ols(data);
  for (std::size_t k = 0; k < cfg.components; ++k) {
    DenseVector b(data.dim());
    for (std::size_t j = 0; j < data.dim(); ++j) {
      if (ru.lo) {
        b[j] = rng.uniform(*ru.lo, *ru.hi);
      } else {
        const double spread = std::abs(center[j]) + 1.0;
        b[j] = center[j] + rng.uniform(-spread, spread);
      }
    }
    out.push_back(std::move(b));
  }
  return out;
}

void require_points(const Dataset& data, std::size_t needed, std::string_view what) {
  if (data.size() < needed) {
    fail(ErrorCode::InvalidArgument, std::string(what) + " needs at least " + std::to_string(needed) +
                                         " points, got " + std::to_string(data.size()));
  }
}

template <typename Params>
struct Model {
  std::string script_name;
  Catalog catalog;
  Params init;
  std::function<double(const Params&)> log_likelihood;
  /// Adjusts degenerate parameters in place; true when something changed.
  std::function<bool(Params&, std::int64_t, std::vector<std::string>&)> repair;
};

template <typename Params>
TrainResult<Params> run(Model<Params>& m, const TrainConfig& cfg) {
  m.catalog.put("init_para", m.init.to_relation());
  const CompiledScript compiled = compile(script(m.script_name), m.catalog);

  TrainResult<Params> out;
  out.log_likelihood.push_back(m.log_likelihood(m.init));
  std::int64_t offset = 0;
  EvalOptions opts;
  opts.max_recursion = cfg.max_iterations;
  opts.on_iteration = [&](std::int64_t t, const Relation& r) -> std::optional<Relation> {
    Params p = Params::from_relation(r);
    const bool changed = m.repair && m.repair(p, offset + t, out.warnings);
    out.log_likelihood.push_back(m.log_likelihood(p));
    if (changed) return p.to_relation();
    return std::nullopt;
  };

  auto absorb = [&](const EvalResult& res) {
    for (auto rec : res.trace.iterations) {
      rec.iteration += offset;
      out.trace.iterations.push_back(rec);
    }
    out.trace.exit = res.trace.exit;
  };

  EvalResult res = evaluate(compiled.plan, m.catalog, opts);
  absorb(res);
  for (std::size_t round = 1; cfg.epsilon && round < cfg.max_rounds; ++round) {
    if (res.trace.exit != ExitReason::MaxRecursion || out.log_likelihood.size() < 2) break;
    const double gain = out.log_likelihood.back() - out.log_likelihood[out.log_likelihood.size() - 2];
    if (gain < *cfg.epsilon) break;
    offset = static_cast<std::int64_t>(out.trace.iterations.size());
    res = evaluate_resumable(compiled.plan, m.catalog, res.recursive, opts);
    absorb(res);
  }
  out.params = Params::from_relation(res.recursive);
  return out;
}

}  // namespace

GmmParams initial_gmm(const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  if (const auto* given = std::get_if<Relation>(&cfg.init)) {
    GmmParams p = GmmParams::from_relation(*given);
    p.validate();
    return p;
  }
  const auto& ru = std::get<RandomUniform>(cfg.init);
  Rng rng(cfg.seed);
  const std::size_t d = data.dim();
  DenseVector lo(d);
  DenseVector hi(d);
  for (std::size_t j = 0; j < d; ++j) {
    if (ru.lo) {
      lo[j] = *ru.lo;
      hi[j] = *ru.hi;
      continue;
    }
    lo[j] = hi[j] = data.x.front()[j];
    for (const auto& x : data.x) {
      lo[j] = std::min(lo[j], x[j]);
      hi[j] = std::max(hi[j], x[j]);
    }
  }
  const DenseMatrix cov = stats::regularize_covariance(sample_covariance(data), variance_floor(data));
  GmmParams p;
  for (std::size_t k = 0; k < cfg.components; ++k) {
    GmmComponent c;
    c.k = static_cast<std::int64_t>(k + 1);
    c.pie = 1.0 / static_cast<double>(cfg.components);
    c.mean = DenseVector(d);
    for (std::size_t j = 0; j < d; ++j) c.mean[j] = rng.uniform(lo[j], hi[j]);
    c.cov = cov;
    p.components.push_back(std::move(c));
  }
  return p;
}

MlrParams initial_mlr(const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  if (const auto* given = std::get_if<Relation>(&cfg.init)) {
    MlrParams p = MlrParams::from_relation(*given);
    p.validate();
    return p;
  }
  Rng rng(cfg.seed);
  const double sigma = std::max(target_std(data), sigma_floor(data));
  MlrParams p;
  auto betas = initial_betas(data, cfg, rng);
  for (std::size_t k = 0; k < cfg.components; ++k) {
    p.components.push_back({static_cast<std::int64_t>(k + 1), 1.0 / static_cast<double>(cfg.components),
                            std::move(betas[k]), sigma});
  }
  return p;
}

MoeParams initial_moe(const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  if (const auto* given = std::get_if<Relation>(&cfg.init)) {
    MoeParams p = MoeParams::from_relation(*given);
    p.validate();
    return p;
  }
  Rng rng(cfg.seed);
  const double sigma = std::max(target_std(data), sigma_floor(data));
  MoeParams p;
  auto betas = initial_betas(data, cfg, rng);
  for (std::size_t k = 0; k < cfg.components; ++k) {
    p.components.push_back({static_cast<std::int64_t>(k + 1), DenseVector(data.dim()), std::move(betas[k]), sigma});
  }
  return p;
}

TrainResult<GmmParams> train_gmm(const Relation& data, const TrainConfig& cfg) {
  const Dataset ds = dataset_of(data);
  require_points(ds, cfg.components, "a mixture of " + std::to_string(cfg.components) + " components");
  Model<GmmParams> m;
  m.script_name = "gmm";
  m.init = initial_gmm(ds, cfg);
  if (m.init.dim() != ds.dim()) fail(ErrorCode::DimensionMismatch, "initial parameters do not match the data dimension");
  m.catalog.put("x", points_relation(ds));
  m.catalog.params.insert_or_assign("n", Value(static_cast<double>(ds.size())));
  m.log_likelihood = [&](const GmmParams& p) { return log_likelihood(p, ds); };

  const DenseMatrix pooled = sample_covariance(ds);
  const double floor = variance_floor(ds);
  auto rng = std::make_shared<Rng>(cfg.seed ^ kRepairStream);
  const double n = static_cast<double>(ds.size());
  m.repair = [&, rng](GmmParams& p, std::int64_t t, std::vector<std::string>& warnings) {
    bool changed = false;
    bool reinit = false;
    for (auto& c : p.components) {
      if (c.pie * n < kEmptyMass) {
        c.mean = ds.x[rng->index(ds.size())];
        c.cov = stats::regularize_covariance(pooled, floor);
        c.pie = 1.0 / static_cast<double>(p.size());
        reinit = changed = true;
        warnings.push_back("EmptyComponent: component " + std::to_string(c.k) +
                           " reinitialized after iteration " + std::to_string(t));
        continue;
      }
      DenseMatrix fixed = stats::regularize_covariance(c.cov, floor);
      if (!(fixed == c.cov)) {
        c.cov = std::move(fixed);
        changed = true;
      }
    }
    if (reinit) {
      double total = 0.0;
      for (const auto& c : p.components) total += c.pie;
      for (auto& c : p.components) c.pie /= total;
    }
    return changed;
  };
  return run(m, cfg);
}

TrainResult<MlrParams> train_mlr(const Relation& data, const TrainConfig& cfg) {
  const Dataset ds = dataset_of(data, true);
  require_points(ds, cfg.components * std::max<std::size_t>(ds.dim(), 1), "the regression mixture");
  Model<MlrParams> m;
  m.script_name = "mlr";
  m.init = initial_mlr(ds, cfg);
  m.catalog.put("xy", targets_relation(ds));
  m.catalog.params.insert_or_assign("n", Value(static_cast<double>(ds.size())));
  m.catalog.params.insert_or_assign("sigma_min", Value(sigma_floor(ds)));
  m.log_likelihood = [&](const MlrParams& p) { return log_likelihood(p, ds); };
  return run(m, cfg);
}

TrainResult<MoeParams> train_moe(const Relation& data, const TrainConfig& cfg) {
  const Dataset ds = dataset_of(data, true);
  require_points(ds, cfg.components * std::max<std::size_t>(ds.dim(), 1), "the mixture of experts");
  Model<MoeParams> m;
  m.script_name = "moe";
  m.init = initial_moe(ds, cfg);
  m.catalog.put("xy", targets_relation(ds));
  m.catalog.params.insert_or_assign("sigma_min", Value(sigma_floor(ds)));
  m.catalog.params.insert_or_assign("kcount", Value(m.init.components.back().k));
  m.log_likelihood = [&](const MoeParams& p) { return log_likelihood(p, ds); };
  return run(m, cfg);
}

}  // namespace emview::em
