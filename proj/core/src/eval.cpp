#include "emview/eval.hpp"

#include <algorithm>
#include <chrono>
#include <ostream>
#include <unordered_set>

#include "emview/error.hpp"
#include "emview/operators.hpp"
#include "emview/sql/parser.hpp"

namespace emview {

void Catalog::put(std::string name, Relation r) { relations.insert_or_assign(std::move(name), std::move(r)); }

bool Catalog::contains(std::string_view name) const { return relations.find(name) != relations.end(); }

const Relation& Catalog::get(std::string_view name) const {
  auto it = relations.find(name);
  if (it == relations.end()) fail(ErrorCode::UnknownRelation, "no relation named '" + std::string(name) + "'");
  return it->second;
}

std::set<std::string, std::less<>> Catalog::names() const {
  std::set<std::string, std::less<>> out;
  for (const auto& [n, r] : relations) out.insert(n);
  return out;
}

std::string_view to_string(ExitReason r) {
  switch (r) {
    case ExitReason::NotRecursive: return "not-recursive";
    case ExitReason::EmptyStep: return "empty-step";
    case ExitReason::Fixpoint: return "fixpoint";
    case ExitReason::MaxRecursion: return "max-recursion";
  }
  return "?";
}

void EvalTrace::write_csv(std::ostream& out) const {
  out << "iteration,rows,changed,millis\n";
  for (const auto& r : iterations) {
    out << r.iteration << ',' << r.rows << ',' << (r.changed ? 1 : 0) << ','
        << format_real(r.millis) << '\n';
  }
}

namespace {

using Locals = std::map<std::string, Relation, std::less<>>;

Relation qualified(const Relation& r, const std::string& alias) {
  std::vector<std::string> names;
  names.reserve(r.schema().size());
  for (const auto& a : r.schema()) names.push_back(alias + "." + std::string(bare_name(a.name)));
  return r.renamed(names).with_name(alias);
}

AggOp agg_op(const sql::AggItem& item, const Schema& schema, const EvalContext& ctx) {
  if (item.function == "count") return AggOp::Count;
  if (item.function == "avg") return AggOp::Avg;
  if (item.function == "max") return AggOp::Max;
  if (item.function == "sum") return sum_op_for(BoundExpr::bind(*item.input, schema, ctx).type());
  fail(ErrorCode::UnknownFunction, "unknown aggregate '" + item.function + "'");
}

class Executor {
 public:
  Executor(const Catalog& catalog, const Locals& locals)
      : catalog_(catalog), locals_(locals), ctx_{catalog.functions, &catalog.params} {}

  Relation run(const sql::PlanNode& n) {
    using K = sql::PlanNode::Kind;
    switch (n.kind) {
      case K::Scan: return qualified(lookup(n.name), n.alias);
      case K::SingleRow: return Relation(Schema{}, {Row{}});
      case K::Qualify: return qualified(run(*n.inputs[0]), n.alias);
      case K::Filter: return select(run(*n.inputs[0]), *n.predicate, ctx_);
      case K::Join: return join(run(*n.inputs[0]), run(*n.inputs[1]), n.pairs);
      case K::Cartesian: return cartesian(run(*n.inputs[0]), run(*n.inputs[1]));
      case K::Aggregate: {
        Relation in = run(*n.inputs[0]);
        std::vector<AggSpec> specs;
        for (const auto& a : n.aggs) specs.push_back({agg_op(a, in.schema(), ctx_), a.input, a.output});
        return group_aggregate(in, n.group_by, specs, ctx_);
      }
      case K::Project: return project_node(run(*n.inputs[0]), n.items);
      case K::Extend: {
        Relation in = run(*n.inputs[0]);
        std::vector<ProjectItem> items;
        for (const auto& a : in.schema()) items.push_back({col(a.name), a.name});
        items.insert(items.end(), n.items.begin(), n.items.end());
        return project(in, items, ctx_);
      }
      case K::Rename: {
        Relation in = run(*n.inputs[0]);
        if (in.schema().size() != n.names.size()) {
          fail(ErrorCode::SchemaMismatch, "query yields " + std::to_string(in.schema().size()) +
                                              " columns but " + std::to_string(n.names.size()) +
                                              " are declared");
        }
        return in.renamed(n.names);
      }
      case K::Union: {
        Relation acc = run(*n.inputs[0]);
        for (std::size_t i = 1; i < n.inputs.size(); ++i) acc = union_all(acc, run(*n.inputs[i]));
        return acc;
      }
    }
    fail(ErrorCode::InvalidArgument, "unknown plan node");
  }

 private:
  const Catalog& catalog_;
  const Locals& locals_;
  EvalContext ctx_;

  const Relation& lookup(const std::string& name) const {
    auto it = locals_.find(name);
    if (it != locals_.end()) return it->second;
    return catalog_.get(name);
  }

  Relation project_node(const Relation& in, const std::vector<ProjectItem>& items) {
    std::vector<ProjectItem> expanded;
    for (const auto& it : items) {
      if (it.expr->kind != Expr::Kind::Star) {
        expanded.push_back(it);
        continue;
      }
      for (const auto& a : in.schema()) {
        const std::string_view bare = bare_name(a.name);
        const auto same_bare = std::count_if(in.schema().begin(), in.schema().end(),
                                             [&](const Attribute& b) { return bare_name(b.name) == bare; });
        expanded.push_back({col(a.name), same_bare > 1 ? a.name : std::string(bare)});
      }
    }
    return project(in, expanded, ctx_);
  }
};

// Int and Real columns unify to Real; anything else must agree exactly.
Schema unify(const Schema& a, const Schema& b, const std::vector<std::string>& names) {
  if (a.size() != b.size()) {
    fail(ErrorCode::SchemaMismatch, "recursive step yields " + std::to_string(b.size()) +
                                        " columns, the recursive relation has " +
                                        std::to_string(a.size()));
  }
  std::vector<Attribute> attrs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CellType t = a[i].type;
    if (t != b[i].type) {
      if (t.numeric() && b[i].type.numeric()) {
        t = CellType::real();
      } else {
        fail(ErrorCode::SchemaMismatch, "column " + names[i] + " is " + to_string(a[i].type) +
                                            " in the recursive relation but " +
                                            to_string(b[i].type) + " in the step");
      }
    }
    attrs.push_back({names[i], t});
  }
  return Schema(std::move(attrs));
}

Relation coerce(const Relation& r, const Schema& target) {
  bool same = true;
  for (std::size_t i = 0; i < target.size(); ++i) same = same && r.schema()[i].type == target[i].type;
  if (same) return r.renamed(target.names());
  std::vector<Row> rows;
  rows.reserve(r.size());
  for (const Row& row : r.rows()) {
    Row out = row;
    for (std::size_t i = 0; i < target.size(); ++i) {
      if (target[i].type.type == ValueType::Real && out[i].is_int()) out[i] = Value(out[i].as_real());
    }
    rows.push_back(std::move(out));
  }
  return Relation::unchecked(target, std::move(rows));
}

Relation set_union(const Relation& r, const Relation& s) {
  std::unordered_set<Row, RowHash> seen(r.rows().begin(), r.rows().end());
  std::vector<Row> rows(r.rows().begin(), r.rows().end());
  for (const Row& row : s.rows()) {
    if (seen.insert(row).second) rows.push_back(row);
  }
  return Relation::unchecked(r.schema(), std::move(rows));
}

[[noreturn]] void rethrow_at(const Error& e, std::int64_t iteration, const std::string& where) {
  std::string msg = "iteration " + std::to_string(iteration);
  if (!where.empty()) msg += ", " + where;
  throw Error(e.code(), msg + ": " + e.what());
}

EvalResult run_loop(const sql::LogicalPlan& plan, const Catalog& catalog, Relation r,
                    const EvalOptions& options) {
  const std::int64_t bound = options.max_recursion.value_or(plan.max_recursion);
  if (bound <= 0) fail(ErrorCode::InvalidArgument, "recursion bound must be positive");
  EvalResult out;
  out.trace.exit = ExitReason::MaxRecursion;
  const auto& key = plan.key;

  for (std::int64_t t = 1; t <= bound; ++t) {
    const auto start = std::chrono::steady_clock::now();
    Locals locals;
    locals.emplace(plan.recursive_name, r);
    std::string where;
    try {
      for (const auto& temp : plan.temporaries) {
        where = "computing " + temp.name;
        Relation v = Executor(catalog, locals).run(*temp.plan);
        locals.insert_or_assign(temp.name, std::move(v));
      }
      where = "recursive step of " + plan.recursive_name;
      Relation step = Executor(catalog, locals).run(*plan.step);
      const auto elapsed = [&] {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
      };
      if (step.empty()) {
        out.trace.iterations.push_back({t, r.size(), false, elapsed()});
        out.trace.exit = ExitReason::EmptyStep;
        break;
      }
      const Schema schema = unify(r.schema(), step.schema(), plan.columns);
      const Relation prev = coerce(r, schema);
      step = coerce(step, schema);
      where = "merging into " + plan.recursive_name;
      Relation next = plan.mode == sql::UnionMode::UnionAll ? set_union(prev, step)
                                                            : union_by_update(prev, step, key);
      if (options.on_iteration) {
        where = "iteration hook";
        if (auto repl = options.on_iteration(t, next)) next = coerce(*repl, unify(schema, repl->schema(), plan.columns));
      }
      const bool changed = !same_rows(next, prev);
      r = std::move(next);
      out.trace.iterations.push_back({t, r.size(), changed, elapsed()});
      if (!changed) {
        out.trace.exit = ExitReason::Fixpoint;
        break;
      }
    } catch (const Error& e) {
      rethrow_at(e, t, where);
    }
  }
  Locals locals;
  locals.emplace(plan.recursive_name, r);
  out.result = Executor(catalog, locals).run(*plan.final);
  out.recursive = std::move(r);
  return out;
}

}  // namespace

Relation execute(const sql::PlanNode& node, const Catalog& catalog, const Locals& locals) {
  return Executor(catalog, locals).run(node);
}

EvalResult evaluate(const sql::LogicalPlan& plan, const Catalog& catalog, const EvalOptions& options) {
  if (!plan.recursive()) {
    EvalResult out;
    out.result = execute(*plan.final, catalog);
    out.trace.exit = ExitReason::NotRecursive;
    return out;
  }
  Locals locals;
  for (const auto& temp : plan.init_temporaries) {
    Relation v = Executor(catalog, locals).run(*temp.plan);
    locals.insert_or_assign(temp.name, std::move(v));
  }
  Relation r0 = Executor(catalog, locals).run(*plan.init);
  if (plan.mode == sql::UnionMode::UnionByUpdate) r0 = r0.with_key(plan.key);
  return run_loop(plan, catalog, std::move(r0), options);
}

EvalResult evaluate_resumable(const sql::LogicalPlan& plan, const Catalog& catalog,
                              const Relation& initial, const EvalOptions& options) {
  if (!plan.recursive()) fail(ErrorCode::InvalidArgument, "statement is not recursive");
  if (initial.schema().size() != plan.columns.size()) {
    fail(ErrorCode::SchemaMismatch, "initial relation has " +
                                        std::to_string(initial.schema().size()) + " columns, " +
                                        plan.recursive_name + " declares " +
                                        std::to_string(plan.columns.size()));
  }
  Relation r0 = initial.renamed(plan.columns);
  if (plan.mode == sql::UnionMode::UnionByUpdate) r0 = r0.with_key(plan.key);
  return run_loop(plan, catalog, std::move(r0), options);
}

CompiledScript compile(std::string_view source, const Catalog& catalog) {
  CompiledScript c;
  c.ast = sql::parse(source);
  c.graph = sql::validate(c.ast, catalog.names());
  c.plan = sql::lower(c.ast, c.graph, *catalog.functions);
  return c;
}

EvalResult run_script(std::string_view source, const Catalog& catalog, const EvalOptions& options) {
  const CompiledScript c = compile(source, catalog);
  return evaluate(c.plan, catalog, options);
}

}  // namespace emview
