#pragma once

#include <vector>

#include "emview/em/params.hpp"
#include "emview/relation.hpp"

namespace emview::em {

/// Σ_i ln Σ_k π_k N(x_i | μ_k, σ_k), densities floored at the stats floor.
double log_likelihood(const GmmParams& params, const Relation& data);
double log_likelihood(const GmmParams& params, const Dataset& data);
/// Σ_i ln Σ_k π_k N(y_i | x_i·β_k, σ_k).
double log_likelihood(const MlrParams& params, const Relation& data);
double log_likelihood(const MlrParams& params, const Dataset& data);
/// Σ_i ln Σ_k g_k(x_i) N(y_i | x_i·β_k, σ_k).
double log_likelihood(const MoeParams& params, const Relation& data);
double log_likelihood(const MoeParams& params, const Dataset& data);

/// Posterior memberships of one point, in component order.
std::vector<double> posterior(const GmmParams& params, const DenseVector& x);

/// Responsibilities R(id, k, p): the E-step, one pass over the data.
Relation infer_posterior(const GmmParams& params, const Relation& data);

/// CLU(id, k): per id the component of maximal posterior, ties to the smallest k.
Relation cluster_assign(const Relation& responsibilities);

}  // namespace emview::em
