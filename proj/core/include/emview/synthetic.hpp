#pragma once

#include <cstdint>
#include <string_view>

#include "emview/relation.hpp"

namespace emview::synth {

enum class Generator { GaussianMixture, LinearMixture, Rfm };

std::string_view to_string(Generator g);
Generator generator_from_string(std::string_view s);

/// Point i belongs to component i mod K, so n = c·K gives exactly c points per
/// component. Labels are 1-based.
struct SyntheticSpec {
  Generator generator = Generator::GaussianMixture;
  std::size_t n = 100;
  std::size_t d = 2;
  std::size_t components = 2;
  std::uint64_t seed = 1;
  /// Range of means (Gaussian) or coefficients (linear).
  double lo = 0.0;
  double hi = 10.0;
  /// Range of the isotropic standard deviation of each Gaussian.
  double sd_lo = 0.5;
  double sd_hi = 1.0;
  /// Standard deviation of the regression noise.
  double noise = 0.5;

  void validate() const;
};

/// (id, x, label) with x drawn from K isotropic Gaussians.
Relation gaussian_mixture(const SyntheticSpec& spec);
/// (id, x, y, label) with x = [1, u_2, ..., u_d], u ~ U[0, 1], y = x·β_k + noise.
Relation linear_mixture(const SyntheticSpec& spec);
/// (id, x, label) with 3-d recency/frequency/monetary-like features drawn
/// from log-normal segments, then standardized per feature.
Relation rfm(const SyntheticSpec& spec);

Relation generate(const SyntheticSpec& spec);

}  // namespace emview::synth
