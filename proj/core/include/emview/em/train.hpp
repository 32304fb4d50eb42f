#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "emview/em/params.hpp"
#include "emview/eval.hpp"

namespace emview::em {

/// Random initial parameters. For GMM the means are drawn uniformly from
/// [lo, hi]^d, or from the data bounding box when no range is given; for
/// MLR/MOE the expert weights are drawn from [lo, hi]^d, or around the
/// ordinary least-squares fit when no range is given.
struct RandomUniform {
  std::optional<double> lo;
  std::optional<double> hi;
};

struct TrainConfig {
  std::size_t components = 2;
  /// Recursion bound for one run of the model script.
  std::int64_t max_iterations = 10;
  std::uint64_t seed = 1;
  /// A relation in the model-view layout gives explicit initial parameters.
  std::variant<RandomUniform, Relation> init = RandomUniform{};
  /// When set, the script is re-run from its own result in chunks of
  /// max_iterations until the log-likelihood gain of an iteration drops below epsilon.
  std::optional<double> epsilon;
  /// Cap on chunks for the epsilon loop.
  std::size_t max_rounds = 100;

  /// Throws InvalidArgument for K < 1, a non-positive bound, or lo >= hi.
  void validate() const;
};

template <typename Params>
struct TrainResult {
  Params params;
  /// Log-likelihood of the initial parameters followed by one entry per iteration.
  std::vector<double> log_likelihood;
  EvalTrace trace;
  std::vector<std::string> warnings;

  std::size_t iterations() const { return trace.iterations.size(); }
};

/// Gaussian mixture EM through the shipped "gmm" script on X(id, x). Components
/// whose mass n_k falls below 1e-8 are reinitialized (random data point mean,
/// pooled covariance, π_k = 1/K, then renormalized) with a warning, and
/// covariances are kept positive definite with a variance floor of
/// (1e-6 · data range)².
TrainResult<GmmParams> train_gmm(const Relation& data, const TrainConfig& cfg);

/// Mixture of linear regressions through the "mlr" script on XY(id, x, y).
TrainResult<MlrParams> train_mlr(const Relation& data, const TrainConfig& cfg);

/// Mixture of experts through the "moe" script on XY(id, x, y).
TrainResult<MoeParams> train_moe(const Relation& data, const TrainConfig& cfg);

GmmParams initial_gmm(const Dataset& data, const TrainConfig& cfg);
MlrParams initial_mlr(const Dataset& data, const TrainConfig& cfg);
MoeParams initial_moe(const Dataset& data, const TrainConfig& cfg);

/// Biased sample covariance of the points.
DenseMatrix sample_covariance(const Dataset& data);
/// Largest coordinate range of the points; 0 for fewer than two distinct values.
double data_range(const Dataset& data);
/// Standard-deviation floor of the regression models: 1e-6 · range(y), at least 1e-12.
double sigma_floor(const Dataset& data);

}  // namespace emview::em
