#pragma once

#include <optional>
#include <span>
#include <vector>

#include "emview/error.hpp"
#include "emview/linalg.hpp"

namespace emview::stats {

/// Densities are floored here before they enter a Bayes-rule normalization.
inline constexpr double kDensityFloor = 1e-300;

/// Lower-triangular factor L of a symmetric positive-definite matrix, A = L Lᵀ.
class Cholesky {
 public:
  /// Returns nothing when `a` is not numerically positive definite.
  static std::optional<Cholesky> try_factor(const DenseMatrix& a);

  /// Factorizes `a`; on failure retries once with λI added, where
  /// λ = 1e-6 · trace(a) / d. A second failure throws `on_failure`.
  static Cholesky factor_regularized(const DenseMatrix& a, ErrorCode on_failure);

  std::size_t dim() const noexcept { return lower_.rows(); }
  const DenseMatrix& lower() const noexcept { return lower_; }
  double log_det() const;
  /// Solves L y = b.
  DenseVector solve_lower(const DenseVector& b) const;
  /// Solves A x = b.
  DenseVector solve(const DenseVector& b) const;

 private:
  explicit Cholesky(DenseMatrix lower) : lower_(std::move(lower)) {}
  DenseMatrix lower_;
};

/// Multivariate normal density N(x | mean, cov), floored at kDensityFloor.
double norm_pdf(const DenseVector& x, const DenseVector& mean, const DenseMatrix& cov);
/// Same density with a precomputed factor of the covariance.
double norm_pdf(const DenseVector& x, const DenseVector& mean, const Cholesky& cov_factor);
/// One-dimensional density parameterized by standard deviation, floored at kDensityFloor.
double norm_pdf_1d(double x, double mean, double stddev);

double mahalanobis(const DenseVector& x, const DenseVector& mean, const DenseMatrix& cov);
double mahalanobis(const DenseVector& x, const DenseVector& mean, const Cholesky& cov_factor);

/// Shannon entropy in nats, with 0 ln 0 = 0. Entries must be >= 0 and sum to 1 within 1e-9.
double entropy(std::span<const double> posteriors);

/// g_k = exp(x·θ_k) / Σ_j exp(x·θ_j), evaluated after subtracting the max logit.
std::vector<double> softmax_gate(const DenseVector& x, std::span<const DenseVector> thetas);

/// Weighted least squares via the normal equations XᵀWXβ = XᵀWy.
/// `design` is n×d; throws SingularDesign when the normal matrix cannot be
/// factorized after regularization.
DenseVector least_squares(const DenseMatrix& design, const DenseVector& targets,
                          const std::optional<DenseVector>& weights = std::nullopt);

/// Solves A x = b for symmetric A with the same regularization policy as
/// least_squares. Backs the dialect's `solve` function.
DenseVector solve_symmetric(const DenseMatrix& a, const DenseVector& b);

/// Symmetrizes `cov` and raises its diagonal to at least `min_variance`; if it
/// still does not factorize, adds λI per Cholesky::factor_regularized.
DenseMatrix regularize_covariance(const DenseMatrix& cov, double min_variance);

}  // namespace emview::stats
