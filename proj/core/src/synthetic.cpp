#include "emview/synthetic.hpp"

#include <cmath>
#include <string>

#include "emview/error.hpp"
#include "emview/random.hpp"

namespace emview::synth {

std::string_view to_string(Generator g) {
  switch (g) {
    case Generator::GaussianMixture: return "gmm";
    case Generator::LinearMixture: return "linear";
    case Generator::Rfm: return "rfm";
  }
  return "?";
}

Generator generator_from_string(std::string_view s) {
  if (s == "gmm" || s == "gaussian") return Generator::GaussianMixture;
  if (s == "linear" || s == "mlr") return Generator::LinearMixture;
  if (s == "rfm") return Generator::Rfm;
  fail(ErrorCode::InvalidArgument, "unknown generator '" + std::string(s) + "'");
}

void SyntheticSpec::validate() const {
  if (n < 1) fail(ErrorCode::InvalidArgument, "n must be at least 1");
  if (d < 1) fail(ErrorCode::InvalidArgument, "d must be at least 1");
  if (components < 1) fail(ErrorCode::InvalidArgument, "component count must be at least 1");
  if (!(lo <= hi)) fail(ErrorCode::InvalidArgument, "parameter range needs lo <= hi");
  if (!(sd_lo > 0.0 && sd_lo <= sd_hi)) fail(ErrorCode::InvalidArgument, "deviation range needs 0 < sd_lo <= sd_hi");
  if (!(noise >= 0.0)) fail(ErrorCode::InvalidArgument, "noise must be non-negative");
}

namespace {

Value label_of(std::size_t i, std::size_t k) { return Value(static_cast<std::int64_t>(i % k + 1)); }

}  // namespace

Relation gaussian_mixture(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::vector<DenseVector> means;
  std::vector<double> sds;
  for (std::size_t k = 0; k < spec.components; ++k) {
    DenseVector m(spec.d);
    for (std::size_t j = 0; j < spec.d; ++j) m[j] = rng.uniform(spec.lo, spec.hi);
    means.push_back(std::move(m));
    sds.push_back(rng.uniform(spec.sd_lo, spec.sd_hi));
  }
  std::vector<Row> rows;
  rows.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const std::size_t k = i % spec.components;
    DenseVector x(spec.d);
    for (std::size_t j = 0; j < spec.d; ++j) x[j] = means[k][j] + sds[k] * rng.normal();
    rows.push_back({Value(static_cast<std::int64_t>(i + 1)), Value(std::move(x)), label_of(i, spec.components)});
  }
  Schema schema({{"id", CellType::integer()}, {"x", CellType::vector(spec.d)}, {"label", CellType::integer()}});
  return Relation(std::move(schema), std::move(rows));
}

Relation linear_mixture(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::vector<DenseVector> betas;
  for (std::size_t k = 0; k < spec.components; ++k) {
    DenseVector b(spec.d);
    for (std::size_t j = 0; j < spec.d; ++j) b[j] = rng.uniform(spec.lo, spec.hi);
    betas.push_back(std::move(b));
  }
  std::vector<Row> rows;
  rows.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const std::size_t k = i % spec.components;
    DenseVector x(spec.d);
    x[0] = 1.0;
    for (std::size_t j = 1; j < spec.d; ++j) x[j] = rng.uniform();
    const double y = dot(x, betas[k]) + spec.noise * rng.normal();
    rows.push_back({Value(static_cast<std::int64_t>(i + 1)), Value(std::move(x)), Value(y),
                    label_of(i, spec.components)});
  }
  Schema schema({{"id", CellType::integer()},
                 {"x", CellType::vector(spec.d)},
                 {"y", CellType::real()},
                 {"label", CellType::integer()}});
  return Relation(std::move(schema), std::move(rows));
}

Relation rfm(const SyntheticSpec& spec) {
  spec.validate();
  constexpr std::size_t d = 3;
  Rng rng(spec.seed);
  // Segment centers on the log scale: recency in days, purchase count, spend.
  const double lo[d] = {1.0, 0.0, 2.0};
  const double hi[d] = {5.5, 3.5, 7.0};
  std::vector<DenseVector> centers;
  for (std::size_t k = 0; k < spec.components; ++k) {
    DenseVector c(d);
    for (std::size_t j = 0; j < d; ++j) c[j] = rng.uniform(lo[j], hi[j]);
    centers.push_back(std::move(c));
  }
  std::vector<DenseVector> xs;
  xs.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const auto& c = centers[i % spec.components];
    DenseVector x(d);
    for (std::size_t j = 0; j < d; ++j) x[j] = std::exp(c[j] + 0.25 * rng.normal());
    xs.push_back(std::move(x));
  }
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (const auto& x : xs) mean += x[j];
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (const auto& x : xs) var += (x[j] - mean) * (x[j] - mean);
    const double sd = std::sqrt(var / static_cast<double>(xs.size()));
    for (auto& x : xs) x[j] = sd > 0.0 ? (x[j] - mean) / sd : 0.0;
  }
  std::vector<Row> rows;
  rows.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    rows.push_back({Value(static_cast<std::int64_t>(i + 1)), Value(std::move(xs[i])), label_of(i, spec.components)});
  }
  Schema schema({{"id", CellType::integer()}, {"x", CellType::vector(d)}, {"label", CellType::integer()}});
  return Relation(std::move(schema), std::move(rows));
}

Relation generate(const SyntheticSpec& spec) {
  switch (spec.generator) {
    case Generator::GaussianMixture: return gaussian_mixture(spec);
    case Generator::LinearMixture: return linear_mixture(spec);
    case Generator::Rfm: return rfm(spec);
  }
  fail(ErrorCode::InvalidArgument, "unknown generator");
}

}  // namespace emview::synth
