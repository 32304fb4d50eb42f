#pragma once

#include <initializer_list>
#include <string>
#include <vector>

#include "emview/em/params.hpp"
#include "emview/random.hpp"
#include "emview/relation.hpp"

namespace emview::testing {

/// Relation whose column types are taken from the first row.
Relation make_relation(const std::vector<std::string>& names, std::vector<Row> rows);
/// Same, with explicit types, for empty relations.
Relation make_typed(const std::vector<Attribute>& attrs, std::vector<Row> rows);

/// Sparse matrix (f, t, val) with each entry of an r×c matrix drawn from
/// {-2..2} and kept with probability `density`.
Relation random_sparse(std::size_t rows, std::size_t cols, double density, Rng& rng);

/// Points (id, x) with ids 1..n.
Relation points(const std::vector<DenseVector>& xs);
Relation scalar_points(const std::vector<double>& xs);

em::GmmParams gmm(std::initializer_list<em::GmmComponent> comps);

}  // namespace emview::testing
