#include "emview/em/inference.hpp"

#include <cmath>
#include <unordered_map>

#include "emview/error.hpp"
#include "emview/stats.hpp"

namespace emview::em {
namespace {

std::vector<stats::Cholesky> factors(const GmmParams& p) {
  std::vector<stats::Cholesky> out;
  out.reserve(p.size());
  for (const auto& c : p.components) {
    out.push_back(stats::Cholesky::factor_regularized(c.cov, ErrorCode::NonPositiveDefinite));
  }
  return out;
}

void check_dim(std::size_t model, std::size_t data) {
  if (model != data) {
    fail(ErrorCode::DimensionMismatch, "model has dimension " + std::to_string(model) +
                                           ", data has " + std::to_string(data));
  }
}

// π_k N_k for each component, densities floored.
void weighted_densities(const GmmParams& p, const std::vector<stats::Cholesky>& f,
                        const DenseVector& x, std::vector<double>& out) {
  out.resize(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    out[k] = stats::norm_pdf(x, p.components[k].mean, f[k]) * p.components[k].pie;
  }
}

double expert_density(const DenseVector& x, double y, const DenseVector& beta, double sigma) {
  return stats::norm_pdf_1d(y, dot(x, beta), sigma);
}

}  // namespace

double log_likelihood(const GmmParams& params, const Dataset& data) {
  if (data.size() == 0) return 0.0;
  check_dim(params.dim(), data.dim());
  const auto f = factors(params);
  std::vector<double> w;
  double total = 0.0;
  for (const auto& x : data.x) {
    weighted_densities(params, f, x, w);
    double s = 0.0;
    for (double v : w) s += v;
    total += std::log(std::max(s, stats::kDensityFloor));
  }
  return total;
}

double log_likelihood(const GmmParams& params, const Relation& data) {
  return log_likelihood(params, dataset_of(data));
}

double log_likelihood(const MlrParams& params, const Dataset& data) {
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    double s = 0.0;
    for (const auto& c : params.components) s += expert_density(data.x[i], data.y[i], c.beta, c.sigma) * c.pie;
    total += std::log(std::max(s, stats::kDensityFloor));
  }
  return total;
}

double log_likelihood(const MlrParams& params, const Relation& data) {
  return log_likelihood(params, dataset_of(data, true));
}

double log_likelihood(const MoeParams& params, const Dataset& data) {
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto g = params.gate(data.x[i]);
    double s = 0.0;
    for (std::size_t k = 0; k < params.size(); ++k) {
      const auto& c = params.components[k];
      s += g[k] * expert_density(data.x[i], data.y[i], c.beta, c.sigma);
    }
    total += std::log(std::max(s, stats::kDensityFloor));
  }
  return total;
}

double log_likelihood(const MoeParams& params, const Relation& data) {
  return log_likelihood(params, dataset_of(data, true));
}

std::vector<double> posterior(const GmmParams& params, const DenseVector& x) {
  check_dim(params.dim(), x.size());
  const auto f = factors(params);
  std::vector<double> w;
  weighted_densities(params, f, x, w);
  double s = 0.0;
  for (double v : w) s += v;
  for (double& v : w) v /= s;
  return w;
}

Relation infer_posterior(const GmmParams& params, const Relation& data) {
  const Dataset ds = dataset_of(data);
  if (ds.size() > 0) check_dim(params.dim(), ds.dim());
  const auto f = factors(params);
  const CellType id_type = ds.ids.empty() ? CellType::integer() : ds.ids.front().cell_type();
  Schema schema({{"id", id_type}, {"k", CellType::integer()}, {"p", CellType::real()}});
  std::vector<Row> rows;
  rows.reserve(ds.size() * params.size());
  std::vector<double> w;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    weighted_densities(params, f, ds.x[i], w);
    double s = 0.0;
    for (double v : w) s += v;
    for (std::size_t k = 0; k < params.size(); ++k) {
      rows.push_back({ds.ids[i], Value(params.components[k].k), Value(w[k] / s)});
    }
  }
  return Relation(std::move(schema), std::move(rows));
}

Relation cluster_assign(const Relation& r) {
  const auto& s = r.schema();
  const std::size_t ii = s.index_of("id");
  const std::size_t ik = s.index_of("k");
  const std::size_t ip = s.index_of("p");
  std::unordered_map<Row, std::size_t, RowHash> index;
  std::vector<Row> out;
  std::vector<double> best;
  for (const Row& row : r.rows()) {
    const double p = row[ip].as_real();
    auto [it, inserted] = index.try_emplace(Row{row[ii]}, out.size());
    if (inserted) {
      out.push_back({row[ii], row[ik]});
      best.push_back(p);
      continue;
    }
    Row& cur = out[it->second];
    double& b = best[it->second];
    if (p > b || (p == b && row[ik].as_int() < cur[1].as_int())) {
      b = p;
      cur[1] = row[ik];
    }
  }
  Schema schema({{"id", s[ii].type}, {"k", s[ik].type}});
  return Relation(std::move(schema), std::move(out));
}

}  // namespace emview::em
