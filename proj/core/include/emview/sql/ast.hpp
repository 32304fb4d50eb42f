#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "emview/expr.hpp"

namespace emview::sql {

struct SelectAst;

/// A FROM entry: a named relation or a parenthesized subquery. Aliases are
/// introduced with AS; subqueries must have one.
struct FromItem {
  std::string table;
  std::shared_ptr<const SelectAst> subquery;
  std::string alias;

  /// Name the item's columns are qualified with.
  const std::string& effective_alias() const { return alias.empty() ? table : alias; }
};

struct SelectItem {
  ExprPtr expr;
  std::string alias;
};

/// An empty from list is a single-row query ("select 0").
struct SelectAst {
  std::vector<SelectItem> projections;
  std::vector<FromItem> from;
  ExprPtr where;
  std::vector<ExprPtr> group_by;
};

struct ComputedBy {
  std::string name;
  std::vector<std::string> columns;
  SelectAst query;
};

enum class UnionMode { UnionAll, UnionByUpdate };

/// One operand of the recursive union together with the computed-by blocks
/// attached to it.
struct Branch {
  SelectAst query;
  std::vector<ComputedBy> computed_by;
};

struct UnionOp {
  UnionMode mode = UnionMode::UnionAll;
  std::vector<std::string> key;
};

/// A statement: either an enhanced recursive WITH (recursive_name set), or a
/// plain SELECT held in final_query.
struct QueryAst {
  std::string recursive_name;
  std::vector<std::string> columns;
  std::vector<Branch> branches;
  /// unions[i] joins branches[i] and branches[i + 1].
  std::vector<UnionOp> unions;
  std::optional<std::int64_t> max_recursion;
  /// Absent means "select * from <recursive_name>".
  std::optional<SelectAst> final_query;

  bool recursive() const { return !recursive_name.empty(); }
  const SelectAst& initial_query() const { return branches.front().query; }
  UnionMode union_mode() const;
  /// Key of the first UNION BY UPDATE, empty when none.
  std::vector<std::string> update_key() const;
  /// The final query, defaulted when absent.
  SelectAst effective_final() const;
};

bool operator==(const FromItem& a, const FromItem& b);
bool operator==(const SelectItem& a, const SelectItem& b);
bool operator==(const SelectAst& a, const SelectAst& b);
bool operator==(const ComputedBy& a, const ComputedBy& b);
bool operator==(const Branch& a, const Branch& b);
bool operator==(const UnionOp& a, const UnionOp& b);
bool operator==(const QueryAst& a, const QueryAst& b);

/// Relation names read by a select, including those inside FROM subqueries.
std::vector<std::string> referenced_relations(const SelectAst& s);

}  // namespace emview::sql
