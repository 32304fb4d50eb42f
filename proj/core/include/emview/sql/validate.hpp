#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "emview/sql/ast.hpp"

namespace emview::sql {

/// Reads-from graph of a statement. Nodes are base tables, computed-by
/// temporaries, the recursive relation, and "<name>@next" for the recursive
/// step's result.
struct DependencyGraph {
  std::vector<std::string> nodes;
  /// (reader, read) pairs.
  std::vector<std::pair<std::string, std::string>> edges;
  /// Temporaries of the initial branch in evaluation order.
  std::vector<std::string> init_order;
  /// Temporaries of the recursive branches in evaluation order.
  std::vector<std::string> step_order;

  bool reads(std::string_view reader, std::string_view read) const;
};

/// Checks the structural rules of the dialect and builds the dependency graph:
/// at most one UNION BY UPDATE and never mixed with UNION ALL
/// (MultipleUnionByUpdate), computed-by bodies that do not read themselves
/// (RecursiveComputedBy), an acyclic temporary graph (CyclicComputedBy), every
/// referenced relation known (UnknownRelation), and an update key drawn from
/// the declared columns (InvalidUpdateKey).
DependencyGraph validate(const QueryAst& q, const std::set<std::string, std::less<>>& base_tables);

}  // namespace emview::sql
