#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "emview/expr.hpp"
#include "emview/relation.hpp"
#include "emview/sql/lower.hpp"

namespace emview {

/// Base relations, scalar parameters and the function table a plan runs against.
struct Catalog {
  std::map<std::string, Relation, std::less<>> relations;
  ParamMap params;
  const FunctionRegistry* functions = &builtin_functions();

  void put(std::string name, Relation r);
  bool contains(std::string_view name) const;
  /// Throws UnknownRelation.
  const Relation& get(std::string_view name) const;
  std::set<std::string, std::less<>> names() const;
};

enum class ExitReason { NotRecursive, EmptyStep, Fixpoint, MaxRecursion };

std::string_view to_string(ExitReason r);

struct IterationRecord {
  std::int64_t iteration = 0;
  std::size_t rows = 0;
  bool changed = false;
  double millis = 0.0;
};

struct EvalTrace {
  std::vector<IterationRecord> iterations;
  ExitReason exit = ExitReason::NotRecursive;

  /// Header "iteration,rows,changed,millis"; changed is 1 or 0.
  void write_csv(std::ostream& out) const;
};

struct EvalOptions {
  /// Overrides the statement's MAXRECURSION.
  std::optional<std::int64_t> max_recursion;
  /// Called after each merge with the iteration index and the new recursive
  /// relation; a returned relation replaces it before the fixpoint check.
  std::function<std::optional<Relation>(std::int64_t, const Relation&)> on_iteration;
};

struct EvalResult {
  /// Result of the final query.
  Relation result;
  /// Terminal recursive relation (empty for plain statements).
  Relation recursive;
  EvalTrace trace;
};

/// Runs a lowered plan: initializes R, then repeatedly evaluates the
/// temporaries and the step and merges the step into R (set union for UNION
/// ALL, union by update otherwise) until the step is empty, R stops changing,
/// or the recursion bound is reached. The step of the last iteration is
/// always merged. Errors are re-raised with the iteration index.
EvalResult evaluate(const sql::LogicalPlan& plan, const Catalog& catalog,
                    const EvalOptions& options = {});

/// As evaluate, but starts from `initial` instead of running the initial query.
EvalResult evaluate_resumable(const sql::LogicalPlan& plan, const Catalog& catalog,
                              const Relation& initial, const EvalOptions& options = {});

/// Evaluates one operator tree; `locals` shadow catalog relations.
Relation execute(const sql::PlanNode& node, const Catalog& catalog,
                 const std::map<std::string, Relation, std::less<>>& locals = {});

struct CompiledScript {
  sql::QueryAst ast;
  sql::DependencyGraph graph;
  sql::LogicalPlan plan;
};

/// parse → validate against the catalog's relation names → lower.
CompiledScript compile(std::string_view source, const Catalog& catalog);

EvalResult run_script(std::string_view source, const Catalog& catalog,
                      const EvalOptions& options = {});

}  // namespace emview
