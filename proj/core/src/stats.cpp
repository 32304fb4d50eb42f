#include "emview/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "emview/error.hpp"

namespace emview::stats {

namespace {

constexpr double kLn2Pi = 1.8378770664093454835606594728112;  // ln(2π)

void require_dims(const DenseVector& x, const DenseVector& mean, std::size_t d, const char* op) {
  if (x.size() != mean.size() || x.size() != d) {
    fail(ErrorCode::DimensionMismatch, std::string(op) + ": dimensions x=" +
                                           std::to_string(x.size()) + " mean=" +
                                           std::to_string(mean.size()) + " cov=" +
                                           std::to_string(d));
  }
}

}  // namespace

std::optional<Cholesky> Cholesky::try_factor(const DenseMatrix& a) {
  if (!a.square() || a.rows() == 0) return std::nullopt;
  const std::size_t n = a.rows();
  DenseMatrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0) || !std::isfinite(diag)) return std::nullopt;
    const double ljj = std::sqrt(diag);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return Cholesky(std::move(l));
}

Cholesky Cholesky::factor_regularized(const DenseMatrix& a, ErrorCode on_failure) {
  if (!a.square()) {
    fail(ErrorCode::DimensionMismatch, "factorization requires a square matrix, got " +
                                           std::to_string(a.rows()) + "x" +
                                           std::to_string(a.cols()));
  }
  if (auto f = try_factor(a)) return *std::move(f);
  const double lambda = 1e-6 * a.trace() / static_cast<double>(a.rows());
  if (lambda > 0.0) {
    DenseMatrix shifted = a;
    for (std::size_t i = 0; i < a.rows(); ++i) shifted(i, i) += lambda;
    if (auto f = try_factor(shifted)) return *std::move(f);
  }
  fail(on_failure, "matrix is not positive definite after regularization (d=" +
                       std::to_string(a.rows()) + ")");
}

double Cholesky::log_det() const {
  double s = 0.0;
  for (std::size_t i = 0; i < lower_.rows(); ++i) s += std::log(lower_(i, i));
  return 2.0 * s;
}

DenseVector Cholesky::solve_lower(const DenseVector& b) const {
  const std::size_t n = dim();
  if (b.size() != n) fail(ErrorCode::DimensionMismatch, "triangular solve: size mismatch");
  DenseVector y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= lower_(i, k) * y[k];
    y[i] = s / lower_(i, i);
  }
  return y;
}

DenseVector Cholesky::solve(const DenseVector& b) const {
  DenseVector y = solve_lower(b);
  const std::size_t n = dim();
  DenseVector x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= lower_(k, ii) * x[k];
    x[ii] = s / lower_(ii, ii);
  }
  return x;
}

double norm_pdf(const DenseVector& x, const DenseVector& mean, const Cholesky& cov_factor) {
  require_dims(x, mean, cov_factor.dim(), "norm_pdf");
  const DenseVector z = cov_factor.solve_lower(sub(x, mean));
  const double quad = dot(z, z);
  const double d = static_cast<double>(x.size());
  const double log_density = -0.5 * quad - 0.5 * cov_factor.log_det() - 0.5 * d * kLn2Pi;
  return std::max(std::exp(log_density), kDensityFloor);
}

double norm_pdf(const DenseVector& x, const DenseVector& mean, const DenseMatrix& cov) {
  require_dims(x, mean, cov.rows(), "norm_pdf");
  return norm_pdf(x, mean, Cholesky::factor_regularized(cov, ErrorCode::NonPositiveDefinite));
}

double norm_pdf_1d(double x, double mean, double stddev) {
  if (!(stddev > 0.0) || !std::isfinite(stddev)) {
    fail(ErrorCode::NonPositiveDefinite,
         "norm: standard deviation must be positive, got " + std::to_string(stddev));
  }
  const double z = (x - mean) / stddev;
  const double density = std::exp(-0.5 * z * z) / (stddev * std::sqrt(2.0 * std::numbers::pi));
  return std::max(density, kDensityFloor);
}

double mahalanobis(const DenseVector& x, const DenseVector& mean, const Cholesky& cov_factor) {
  require_dims(x, mean, cov_factor.dim(), "mahalanobis");
  const DenseVector z = cov_factor.solve_lower(sub(x, mean));
  return std::sqrt(dot(z, z));
}

double mahalanobis(const DenseVector& x, const DenseVector& mean, const DenseMatrix& cov) {
  require_dims(x, mean, cov.rows(), "mahalanobis");
  return mahalanobis(x, mean, Cholesky::factor_regularized(cov, ErrorCode::NonPositiveDefinite));
}

double entropy(std::span<const double> posteriors) {
  double total = 0.0;
  for (double p : posteriors) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      fail(ErrorCode::NotAProbabilityVector, "entropy: negative or non-finite entry");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    fail(ErrorCode::NotAProbabilityVector,
         "entropy: entries sum to " + std::to_string(total) + ", expected 1");
  }
  double h = 0.0;
  for (double p : posteriors)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

std::vector<double> softmax_gate(const DenseVector& x, std::span<const DenseVector> thetas) {
  std::vector<double> logits(thetas.size());
  double top = -INFINITY;
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    logits[k] = dot(x, thetas[k]);
    top = std::max(top, logits[k]);
  }
  for (double& l : logits) l = std::exp(l - top);
  // Summed in sorted order so the result does not depend on component order.
  std::vector<double> sorted = logits;
  std::sort(sorted.begin(), sorted.end());
  double total = 0.0;
  for (double v : sorted) total += v;
  for (double& l : logits) l /= total;
  return logits;
}

DenseVector solve_symmetric(const DenseMatrix& a, const DenseVector& b) {
  if (!a.square() || a.rows() != b.size()) {
    fail(ErrorCode::DimensionMismatch, "solve: system is " + std::to_string(a.rows()) + "x" +
                                           std::to_string(a.cols()) + " with rhs of length " +
                                           std::to_string(b.size()));
  }
  return Cholesky::factor_regularized(a, ErrorCode::SingularDesign).solve(b);
}

DenseVector least_squares(const DenseMatrix& design, const DenseVector& targets,
                          const std::optional<DenseVector>& weights) {
  const std::size_t n = design.rows();
  const std::size_t d = design.cols();
  if (targets.size() != n) {
    fail(ErrorCode::DimensionMismatch, "least_squares: design has " + std::to_string(n) +
                                           " rows but " + std::to_string(targets.size()) +
                                           " targets");
  }
  if (weights && weights->size() != n) {
    fail(ErrorCode::DimensionMismatch, "least_squares: weight count differs from row count");
  }
  if (n < d) {
    fail(ErrorCode::SingularDesign, "least_squares: fewer rows (" + std::to_string(n) +
                                        ") than coefficients (" + std::to_string(d) + ")");
  }
  DenseMatrix normal(d, d);
  DenseVector rhs(d);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weights ? (*weights)[i] : 1.0;
    if (w < 0.0) fail(ErrorCode::InvalidArgument, "least_squares: negative weight");
    if (w == 0.0) continue;
    for (std::size_t r = 0; r < d; ++r) {
      const double wx = w * design(i, r);
      rhs[r] += wx * targets[i];
      for (std::size_t c = 0; c <= r; ++c) normal(r, c) += wx * design(i, c);
    }
  }
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = r + 1; c < d; ++c) normal(r, c) = normal(c, r);
  return Cholesky::factor_regularized(normal, ErrorCode::SingularDesign).solve(rhs);
}

DenseMatrix regularize_covariance(const DenseMatrix& cov, double min_variance) {
  if (!cov.square()) fail(ErrorCode::DimensionMismatch, "covariance must be square");
  DenseMatrix out = cov;
  const std::size_t d = cov.rows();
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = r + 1; c < d; ++c) {
      const double m = 0.5 * (out(r, c) + out(c, r));
      out(r, c) = m;
      out(c, r) = m;
    }
  for (std::size_t i = 0; i < d; ++i) out(i, i) = std::max(out(i, i), min_variance);
  if (Cholesky::try_factor(out)) return out;
  const double lambda = 1e-6 * out.trace() / static_cast<double>(d);
  for (std::size_t i = 0; i < d; ++i) out(i, i) += lambda;
  if (!Cholesky::try_factor(out)) {
    fail(ErrorCode::NonPositiveDefinite, "covariance cannot be regularized to positive definite");
  }
  return out;
}

}  // namespace emview::stats
