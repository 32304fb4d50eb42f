#pragma once

#include <string>
#include <vector>

#include "emview/expr.hpp"
#include "emview/relation.hpp"

namespace emview {

/// Rows of `rel` satisfying `predicate` (bag semantics).
Relation select(const Relation& rel, const Expr& predicate, const EvalContext& ctx = {});

struct ProjectItem {
  ExprPtr expr;
  std::string name;
};

/// One output row per input row; output schema from the item names and the
/// inferred expression types.
Relation project(const Relation& rel, const std::vector<ProjectItem>& items,
                 const EvalContext& ctx = {});

struct JoinPair {
  std::string left;
  std::string right;
};

/// Hash equi-join. Output rows are left cells followed by right cells; a right
/// attribute whose name collides with a left one is qualified with the right
/// relation's name (or "right" when unnamed).
Relation join(const Relation& left, const Relation& right, const std::vector<JoinPair>& on);

Relation cartesian(const Relation& left, const Relation& right);

enum class AggOp { Sum, Count, Max, Avg, VectorSum, MatrixSum };

std::string_view to_string(AggOp op);

/// The sum flavour matching a cell type (Sum, VectorSum or MatrixSum).
AggOp sum_op_for(const CellType& t);

struct AggSpec {
  AggOp op = AggOp::Sum;
  /// Ignored for Count when null (count(*)).
  ExprPtr input;
  std::string output;
};

/// One output row per distinct group key, in first-seen order. Aggregates sum
/// sequentially in input order. With no input rows no groups are emitted, even
/// when `group_by` is empty.
Relation group_aggregate(const Relation& rel, const std::vector<std::string>& group_by,
                         const std::vector<AggSpec>& aggs, const EvalContext& ctx = {});

/// (r − (r ⋉_key s)) ∪ s. Matched rows of r are replaced in place; unmatched
/// rows of s are appended in order. Both inputs must be key-unique.
Relation union_by_update(const Relation& r, const Relation& s, const std::vector<std::string>& key);

/// Bag union (concatenation); schemas must agree on types.
Relation union_all(const Relation& r, const Relation& s);
/// Rows of r that do not occur in s.
Relation difference(const Relation& r, const Relation& s);
/// Rows of r with at least one match in s on the given pairs.
Relation semijoin(const Relation& r, const Relation& s, const std::vector<JoinPair>& on);
/// Duplicate elimination, first occurrence kept.
Relation distinct(const Relation& r);

enum class SemiringPlus { Sum, Max, Min };
enum class SemiringTimes { Multiply, Add, Min, Max };

/// Sparse matrix-vector product over E(F, T, e) and V(ID, v), by position:
/// groups by F, combining e ⊙ v over matches T = ID with ⊕. Absent entries are
/// implicit zeros, so F values without any match produce no row. Output (f, val).
Relation mv_join(const Relation& e, const Relation& v, SemiringPlus plus = SemiringPlus::Sum,
                 SemiringTimes times = SemiringTimes::Multiply);

/// Sparse matrix-matrix product on E.T = E'.F grouped by (E.F, E'.T). Output (f, t, val).
Relation mm_join(const Relation& e, const Relation& e2, SemiringPlus plus = SemiringPlus::Sum,
                 SemiringTimes times = SemiringTimes::Multiply);

/// Join on both indices, combine entries with ⊙, aggregate by F. Output (f, val).
Relation elementwise_join(const Relation& e, const Relation& e2,
                          SemiringPlus plus = SemiringPlus::Sum,
                          SemiringTimes times = SemiringTimes::Multiply);

}  // namespace emview
