#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "emview/expr.hpp"
#include "emview/operators.hpp"
#include "emview/sql/ast.hpp"
#include "emview/sql/validate.hpp"

namespace emview::sql {

struct PlanNode;
using PlanPtr = std::shared_ptr<const PlanNode>;

/// Aggregate call collected from a select list; the relation-core operator is
/// picked at execution time from the input type (sum over vectors becomes a
/// vector sum, and so on).
struct AggItem {
  std::string function;
  /// Null for count(*).
  ExprPtr input;
  std::string output;
};

/// Logical operator tree over relation-core operators.
struct PlanNode {
  enum class Kind {
    Scan,       // catalog relation `name`, columns qualified as alias.column
    SingleRow,  // one row, no columns
    Qualify,    // re-qualify input columns with `alias`
    Filter,     // predicate
    Join,       // hash equi-join on pairs
    Cartesian,
    Aggregate,  // group_by + aggs
    Project,    // items; a Star item expands to all input columns
    Extend,     // input columns followed by items
    Rename,     // positional names
    Union,      // bag union of inputs
  };

  Kind kind = Kind::Scan;
  std::string name;
  std::string alias;
  ExprPtr predicate;
  std::vector<JoinPair> pairs;
  std::vector<std::string> group_by;
  std::vector<AggItem> aggs;
  std::vector<ProjectItem> items;
  std::vector<std::string> names;
  std::vector<PlanPtr> inputs;
};

/// Indented one-node-per-line rendering, for diagnostics and tests.
std::string explain(const PlanNode& node);

struct TempPlan {
  std::string name;
  PlanPtr plan;
};

inline constexpr std::int64_t kDefaultMaxRecursion = 100;

struct LogicalPlan {
  std::string recursive_name;
  std::vector<std::string> columns;
  /// Temporaries computed once before the initial query.
  std::vector<TempPlan> init_temporaries;
  PlanPtr init;
  /// Temporaries recomputed every iteration, in dependency order.
  std::vector<TempPlan> temporaries;
  PlanPtr step;
  UnionMode mode = UnionMode::UnionAll;
  std::vector<std::string> key;
  std::int64_t max_recursion = kDefaultMaxRecursion;
  PlanPtr final;

  bool recursive() const { return !recursive_name.empty(); }
};

/// Lowers a validated statement. Window functions become a partition-grouped
/// aggregation joined back to the partition rows; they are accepted in
/// computed-by bodies, recursive branches and standalone SELECT statements and
/// rejected (WindowNotAllowed) in the initial and final queries of a WITH.
/// Unknown functions raise UnknownFunction; wrong argument counts ArityMismatch.
LogicalPlan lower(const QueryAst& q, const DependencyGraph& graph,
                  const FunctionRegistry& functions = builtin_functions());

/// Lowers a single SELECT.
PlanPtr lower_select(const SelectAst& s, bool windows_allowed,
                     const FunctionRegistry& functions = builtin_functions());

}  // namespace emview::sql
