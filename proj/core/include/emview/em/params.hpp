#pragma once

#include <cstdint>
#include <vector>

#include "emview/linalg.hpp"
#include "emview/relation.hpp"

namespace emview::em {

struct GmmComponent {
  std::int64_t k = 0;
  double pie = 0.0;
  DenseVector mean;
  DenseMatrix cov;
};

/// Gaussian mixture parameters, one component per row of the model view
/// (k, pie, mean, cov), ordered by k.
struct GmmParams {
  std::vector<GmmComponent> components;

  std::size_t size() const { return components.size(); }
  std::size_t dim() const { return components.empty() ? 0 : components.front().mean.size(); }

  Relation to_relation() const;
  /// Accepts vector/matrix columns, or scalar mean with scalar cov holding a
  /// standard deviation (the one-dimensional view layout).
  static GmmParams from_relation(const Relation& r);
  /// Throws InvalidParameters unless the mixing coefficients form a
  /// probability vector (within 1e-9) and every covariance is symmetric and
  /// positive semi-definite within 1e-9.
  void validate() const;
};

struct MlrComponent {
  std::int64_t k = 0;
  double pie = 0.0;
  DenseVector beta;
  double sigma = 1.0;
};

/// Mixture of linear regressions: (k, pie, beta, sigma), sigma a standard deviation.
struct MlrParams {
  std::vector<MlrComponent> components;

  std::size_t size() const { return components.size(); }
  Relation to_relation() const;
  static MlrParams from_relation(const Relation& r);
  void validate() const;
};

struct MoeComponent {
  std::int64_t k = 0;
  DenseVector theta;
  DenseVector beta;
  double sigma = 1.0;
};

/// Mixture of experts: softmax gate weights theta and linear experts (beta, sigma).
struct MoeParams {
  std::vector<MoeComponent> components;

  std::size_t size() const { return components.size(); }
  Relation to_relation() const;
  static MoeParams from_relation(const Relation& r);
  void validate() const;
  /// Gate probabilities for one input.
  std::vector<double> gate(const DenseVector& x) const;
};

/// Columns of a data relation unpacked for host-side numerics. Points come
/// from attribute "x" (a vector, or a number read as a 1-vector); targets from
/// "y" when requested.
struct Dataset {
  std::vector<Value> ids;
  std::vector<DenseVector> x;
  std::vector<double> y;

  std::size_t size() const { return x.size(); }
  std::size_t dim() const { return x.empty() ? 0 : x.front().size(); }
};

Dataset dataset_of(const Relation& data, bool with_targets = false);

/// Relation (id, x) with vector x, as read by the model scripts.
Relation points_relation(const Dataset& data);
/// Relation (id, x, y).
Relation targets_relation(const Dataset& data);

}  // namespace emview::em
