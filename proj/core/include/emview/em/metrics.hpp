#pragma once

#include <string_view>

#include "emview/relation.hpp"

namespace emview::em {

struct ClusteringScore {
  double purity = 0.0;
  double nmi = 0.0;
};

/// Purity and normalized mutual information of CLU(id, k) against truth
/// (id, label_column). NMI uses the arithmetic mean of the two entropies; it
/// is 1 when both partitions are trivial and 0 when exactly one is. Throws
/// LabelMismatch unless both relations cover the same ids exactly once.
ClusteringScore evaluate_clustering(const Relation& clusters, const Relation& truth,
                                    std::string_view label_column = "label");

}  // namespace emview::em
