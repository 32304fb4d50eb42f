#include "emview/em/params.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "emview/error.hpp"
#include "emview/stats.hpp"

namespace emview::em {
namespace {

template <typename C>
void sort_by_k(std::vector<C>& comps) {
  std::sort(comps.begin(), comps.end(), [](const C& a, const C& b) { return a.k < b.k; });
  for (std::size_t i = 1; i < comps.size(); ++i) {
    if (comps[i].k == comps[i - 1].k) {
      fail(ErrorCode::DuplicateKey, "component " + std::to_string(comps[i].k) + " appears twice");
    }
  }
}

DenseVector as_vector(const Value& v) {
  if (v.is_vec()) return v.as_vec();
  return DenseVector{v.as_real()};
}

void check_mixing(double total, std::string_view what) {
  if (std::abs(total - 1.0) > 1e-9) {
    fail(ErrorCode::InvalidParameters,
         std::string(what) + " mixing coefficients sum to " + format_real(total));
  }
}

}  // namespace

Relation GmmParams::to_relation() const {
  const std::size_t d = dim();
  Schema schema({{"k", CellType::integer()},
                 {"pie", CellType::real()},
                 {"mean", CellType::vector(d)},
                 {"cov", CellType::matrix(d, d)}});
  std::vector<Row> rows;
  for (const auto& c : components) rows.push_back({Value(c.k), Value(c.pie), Value(c.mean), Value(c.cov)});
  return Relation(std::move(schema), std::move(rows), std::vector<std::string>{"k"});
}

GmmParams GmmParams::from_relation(const Relation& r) {
  const auto& s = r.schema();
  const std::size_t ik = s.index_of("k");
  const std::size_t ip = s.index_of("pie");
  const std::size_t im = s.index_of("mean");
  const std::size_t ic = s.index_of("cov");
  GmmParams p;
  for (const Row& row : r.rows()) {
    GmmComponent c;
    c.k = row[ik].as_int();
    c.pie = row[ip].as_real();
    c.mean = as_vector(row[im]);
    if (row[ic].is_mat()) {
      c.cov = row[ic].as_mat();
    } else {
      const double sd = row[ic].as_real();
      c.cov = DenseMatrix(1, 1);
      c.cov(0, 0) = sd * sd;
    }
    if (c.cov.rows() != c.mean.size() || c.cov.cols() != c.mean.size()) {
      fail(ErrorCode::DimensionMismatch, "component " + std::to_string(c.k) +
                                             ": covariance shape does not match the mean");
    }
    p.components.push_back(std::move(c));
  }
  sort_by_k(p.components);
  return p;
}

void GmmParams::validate() const {
  if (components.empty()) fail(ErrorCode::InvalidParameters, "mixture has no components");
  double total = 0.0;
  for (const auto& c : components) {
    if (c.pie < 0.0) fail(ErrorCode::InvalidParameters, "negative mixing coefficient");
    if (c.mean.size() != dim()) fail(ErrorCode::DimensionMismatch, "components differ in dimension");
    total += c.pie;
    if (c.cov.asymmetry() > 1e-9) {
      fail(ErrorCode::InvalidParameters, "covariance of component " + std::to_string(c.k) +
                                             " is not symmetric");
    }
    DenseMatrix shifted = c.cov;
    for (std::size_t i = 0; i < shifted.rows(); ++i) shifted(i, i) += 1e-9;
    if (!stats::Cholesky::try_factor(shifted)) {
      fail(ErrorCode::InvalidParameters, "covariance of component " + std::to_string(c.k) +
                                             " is not positive semi-definite");
    }
  }
  check_mixing(total, "GMM");
}

Relation MlrParams::to_relation() const {
  const std::size_t d = components.empty() ? 0 : components.front().beta.size();
  Schema schema({{"k", CellType::integer()},
                 {"pie", CellType::real()},
                 {"beta", CellType::vector(d)},
                 {"sigma", CellType::real()}});
  std::vector<Row> rows;
  for (const auto& c : components) rows.push_back({Value(c.k), Value(c.pie), Value(c.beta), Value(c.sigma)});
  return Relation(std::move(schema), std::move(rows), std::vector<std::string>{"k"});
}

MlrParams MlrParams::from_relation(const Relation& r) {
  const auto& s = r.schema();
  const std::size_t ik = s.index_of("k");
  const std::size_t ip = s.index_of("pie");
  const std::size_t ib = s.index_of("beta");
  const std::size_t is = s.index_of("sigma");
  MlrParams p;
  for (const Row& row : r.rows()) {
    p.components.push_back({row[ik].as_int(), row[ip].as_real(), as_vector(row[ib]), row[is].as_real()});
  }
  sort_by_k(p.components);
  return p;
}

void MlrParams::validate() const {
  if (components.empty()) fail(ErrorCode::InvalidParameters, "mixture has no components");
  double total = 0.0;
  for (const auto& c : components) {
    if (c.pie < 0.0) fail(ErrorCode::InvalidParameters, "negative mixing coefficient");
    if (!(c.sigma > 0.0)) fail(ErrorCode::InvalidParameters, "sigma must be positive");
    total += c.pie;
  }
  check_mixing(total, "MLR");
}

Relation MoeParams::to_relation() const {
  const std::size_t d = components.empty() ? 0 : components.front().beta.size();
  Schema schema({{"k", CellType::integer()},
                 {"theta", CellType::vector(d)},
                 {"beta", CellType::vector(d)},
                 {"sigma", CellType::real()}});
  std::vector<Row> rows;
  for (const auto& c : components) {
    rows.push_back({Value(c.k), Value(c.theta), Value(c.beta), Value(c.sigma)});
  }
  return Relation(std::move(schema), std::move(rows), std::vector<std::string>{"k"});
}

MoeParams MoeParams::from_relation(const Relation& r) {
  const auto& s = r.schema();
  const std::size_t ik = s.index_of("k");
  const std::size_t it = s.index_of("theta");
  const std::size_t ib = s.index_of("beta");
  const std::size_t is = s.index_of("sigma");
  MoeParams p;
  for (const Row& row : r.rows()) {
    p.components.push_back({row[ik].as_int(), as_vector(row[it]), as_vector(row[ib]), row[is].as_real()});
  }
  sort_by_k(p.components);
  return p;
}

void MoeParams::validate() const {
  if (components.empty()) fail(ErrorCode::InvalidParameters, "mixture has no components");
  for (const auto& c : components) {
    if (!(c.sigma > 0.0)) fail(ErrorCode::InvalidParameters, "sigma must be positive");
    if (c.theta.size() != c.beta.size()) {
      fail(ErrorCode::DimensionMismatch, "gate and expert weights differ in length");
    }
  }
}

std::vector<double> MoeParams::gate(const DenseVector& x) const {
  std::vector<DenseVector> thetas;
  thetas.reserve(components.size());
  for (const auto& c : components) thetas.push_back(c.theta);
  return stats::softmax_gate(x, thetas);
}

Dataset dataset_of(const Relation& data, bool with_targets) {
  const auto& s = data.schema();
  const std::size_t ii = s.index_of("id");
  const std::size_t ix = s.index_of("x");
  std::optional<std::size_t> iy;
  if (with_targets) iy = s.index_of("y");
  Dataset out;
  out.ids.reserve(data.size());
  out.x.reserve(data.size());
  for (const Row& row : data.rows()) {
    out.ids.push_back(row[ii]);
    out.x.push_back(as_vector(row[ix]));
    if (iy) out.y.push_back(row[*iy].as_real());
  }
  for (const auto& x : out.x) {
    if (x.size() != out.dim()) fail(ErrorCode::DimensionMismatch, "points differ in dimension");
  }
  return out;
}

Relation points_relation(const Dataset& data) {
  const CellType id_type = data.ids.empty() ? CellType::integer() : data.ids.front().cell_type();
  Schema schema({{"id", id_type}, {"x", CellType::vector(data.dim())}});
  std::vector<Row> rows;
  rows.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) rows.push_back({data.ids[i], Value(data.x[i])});
  return Relation(std::move(schema), std::move(rows));
}

Relation targets_relation(const Dataset& data) {
  const CellType id_type = data.ids.empty() ? CellType::integer() : data.ids.front().cell_type();
  Schema schema({{"id", id_type}, {"x", CellType::vector(data.dim())}, {"y", CellType::real()}});
  std::vector<Row> rows;
  rows.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    rows.push_back({data.ids[i], Value(data.x[i]), Value(data.y[i])});
  }
  return Relation(std::move(schema), std::move(rows));
}

}  // namespace emview::em
