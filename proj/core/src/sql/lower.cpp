#include "emview/sql/lower.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "emview/error.hpp"

namespace emview::sql {
namespace {

PlanPtr node(PlanNode n) { return std::make_shared<const PlanNode>(std::move(n)); }

PlanPtr make(PlanNode::Kind kind, std::vector<PlanPtr> inputs) {
  PlanNode n;
  n.kind = kind;
  n.inputs = std::move(inputs);
  return node(std::move(n));
}

using Rewriter = std::function<ExprPtr(const ExprPtr&)>;

// Bottom-up replacement: `f` returns a replacement or null to keep recursing.
ExprPtr rewrite(const ExprPtr& e, const Rewriter& f) {
  if (!e) return e;
  if (ExprPtr r = f(e)) return r;
  if (e->args.empty()) return e;
  Expr copy = *e;
  bool changed = false;
  for (auto& a : copy.args) {
    ExprPtr na = rewrite(a, f);
    if (na != a) {
      a = std::move(na);
      changed = true;
    }
  }
  return changed ? std::make_shared<const Expr>(std::move(copy)) : e;
}

void collect(const ExprPtr& e, Expr::Kind kind, std::vector<ExprPtr>& out) {
  if (!e) return;
  if (e->kind == kind) {
    if (std::none_of(out.begin(), out.end(), [&](const ExprPtr& x) { return *x == *e; })) {
      out.push_back(e);
    }
    return;
  }
  for (const auto& a : e->args) collect(a, kind, out);
}

void collect_columns(const ExprPtr& e, std::vector<std::string>& out) {
  if (!e) return;
  if (e->kind == Expr::Kind::Column) out.push_back(e->name);
  for (const auto& a : e->args) collect_columns(a, out);
  for (const auto& a : e->partition_by) collect_columns(a, out);
}

std::string qualifier(const std::string& name) {
  const auto dot = name.rfind('.');
  return dot == std::string::npos ? std::string() : name.substr(0, dot);
}

void split_conjuncts(const ExprPtr& e, std::vector<ExprPtr>& out) {
  if (!e) return;
  if (e->kind == Expr::Kind::Binary && e->op == BinaryOp::And) {
    split_conjuncts(e->args[0], out);
    split_conjuncts(e->args[1], out);
    return;
  }
  out.push_back(e);
}

ExprPtr conjoin(const std::vector<ExprPtr>& parts) {
  ExprPtr e;
  for (const auto& p : parts) e = e ? binary(BinaryOp::And, e, p) : p;
  return e;
}

void check_calls(const ExprPtr& e, const FunctionRegistry& functions) {
  if (!e) return;
  if (e->kind == Expr::Kind::Call) {
    const FunctionDef* def = functions.find(e->name);
    if (!def) fail(ErrorCode::UnknownFunction, "unknown function '" + e->name + "'");
    if (e->args.size() < def->min_args || e->args.size() > def->max_args) {
      std::string expected = std::to_string(def->min_args);
      if (def->max_args != def->min_args) expected += " to " + std::to_string(def->max_args);
      fail(ErrorCode::ArityMismatch, "function '" + e->name + "' takes " + expected +
                                         " argument(s), got " + std::to_string(e->args.size()));
    }
  }
  if (e->kind == Expr::Kind::Aggregate) {
    for (const auto& a : e->args) {
      if (contains_aggregate(*a) || contains_window(*a)) {
        fail(ErrorCode::InvalidArgument, "aggregates cannot be nested: " + to_sql(*e));
      }
    }
  }
  for (const auto& a : e->args) check_calls(a, functions);
  for (const auto& a : e->partition_by) check_calls(a, functions);
}

std::string column_name_of(const ExprPtr& e, std::string_view what) {
  if (e->kind != Expr::Kind::Column) {
    fail(ErrorCode::InvalidArgument, std::string(what) + " must name a column, got " + to_sql(*e));
  }
  return e->name;
}

class SelectLowering {
 public:
  SelectLowering(const FunctionRegistry& functions) : functions_(functions) {}

  PlanPtr lower(const SelectAst& s, bool windows_allowed) {
    for (const auto& p : s.projections) check_calls(p.expr, functions_);
    check_calls(s.where, functions_);
    for (const auto& g : s.group_by) check_calls(g, functions_);
    if (s.where && (contains_aggregate(*s.where) || contains_window(*s.where))) {
      fail(ErrorCode::InvalidArgument, "WHERE cannot contain aggregates or window functions");
    }

    PlanPtr plan = from_where(s);
    std::vector<SelectItem> items = s.projections;

    std::vector<ExprPtr> windows;
    for (const auto& it : items) collect(it.expr, Expr::Kind::Window, windows);
    if (!windows.empty()) {
      if (!windows_allowed) {
        fail(ErrorCode::WindowNotAllowed,
             "window functions are only allowed in computed-by and recursive queries: " +
                 to_sql(*windows.front()));
      }
      if (!s.group_by.empty() ||
          std::any_of(items.begin(), items.end(),
                      [](const SelectItem& it) { return contains_aggregate(*it.expr); })) {
        fail(ErrorCode::WindowNotAllowed,
             "window functions cannot be combined with GROUP BY or plain aggregates");
      }
      plan = lower_windows(plan, windows, items);
    }

    std::vector<ExprPtr> aggs;
    for (const auto& it : items) collect(it.expr, Expr::Kind::Aggregate, aggs);
    if (!aggs.empty() || !s.group_by.empty()) plan = lower_aggregate(plan, s.group_by, aggs, items);

    PlanNode project;
    project.kind = PlanNode::Kind::Project;
    project.inputs = {plan};
    for (std::size_t i = 0; i < items.size(); ++i) {
      const SelectItem& it = items[i];
      std::string name = it.alias;
      if (name.empty() && s.projections[i].expr->kind == Expr::Kind::Column) {
        name = std::string(bare_name(s.projections[i].expr->name));
      }
      if (name.empty() && it.expr->kind != Expr::Kind::Star) name = "col" + std::to_string(i + 1);
      project.items.push_back({it.expr, std::move(name)});
    }
    return node(std::move(project));
  }

 private:
  const FunctionRegistry& functions_;
  int window_counter_ = 0;

  PlanPtr from_item(const FromItem& f) {
    if (f.subquery) {
      PlanNode q;
      q.kind = PlanNode::Kind::Qualify;
      q.alias = f.alias;
      q.inputs = {SelectLowering(functions_).lower(*f.subquery, false)};
      return node(std::move(q));
    }
    PlanNode scan;
    scan.kind = PlanNode::Kind::Scan;
    scan.name = f.table;
    scan.alias = f.effective_alias();
    return node(std::move(scan));
  }

  PlanPtr filter(PlanPtr in, ExprPtr pred) {
    PlanNode n;
    n.kind = PlanNode::Kind::Filter;
    n.predicate = std::move(pred);
    n.inputs = {std::move(in)};
    return node(std::move(n));
  }

  PlanPtr from_where(const SelectAst& s) {
    std::vector<ExprPtr> conjuncts;
    split_conjuncts(s.where, conjuncts);
    std::vector<bool> used(conjuncts.size(), false);
    if (s.from.empty()) {
      PlanPtr p = make(PlanNode::Kind::SingleRow, {});
      return s.where ? filter(p, s.where) : p;
    }

    std::set<std::string> scope;
    auto push_filters = [&](PlanPtr p) {
      std::vector<ExprPtr> here;
      for (std::size_t i = 0; i < conjuncts.size(); ++i) {
        if (used[i]) continue;
        std::vector<std::string> cols;
        collect_columns(conjuncts[i], cols);
        const bool local = !cols.empty() && std::all_of(cols.begin(), cols.end(), [&](const auto& c) {
          return scope.contains(qualifier(c));
        });
        if (local) {
          here.push_back(conjuncts[i]);
          used[i] = true;
        }
      }
      return here.empty() ? p : filter(p, conjoin(here));
    };

    PlanPtr plan = from_item(s.from.front());
    scope.insert(s.from.front().effective_alias());
    plan = push_filters(plan);
    for (std::size_t j = 1; j < s.from.size(); ++j) {
      const std::string alias = s.from[j].effective_alias();
      std::vector<JoinPair> pairs;
      for (std::size_t i = 0; i < conjuncts.size(); ++i) {
        const ExprPtr& c = conjuncts[i];
        if (used[i] || c->kind != Expr::Kind::Binary || c->op != BinaryOp::Eq) continue;
        const ExprPtr& a = c->args[0];
        const ExprPtr& b = c->args[1];
        if (a->kind != Expr::Kind::Column || b->kind != Expr::Kind::Column) continue;
        const std::string qa = qualifier(a->name);
        const std::string qb = qualifier(b->name);
        if (scope.contains(qa) && qb == alias && qa != alias) {
          pairs.push_back({a->name, b->name});
        } else if (scope.contains(qb) && qa == alias && qb != alias) {
          pairs.push_back({b->name, a->name});
        } else {
          continue;
        }
        used[i] = true;
      }
      PlanNode j_node;
      j_node.kind = pairs.empty() ? PlanNode::Kind::Cartesian : PlanNode::Kind::Join;
      j_node.pairs = std::move(pairs);
      j_node.inputs = {plan, from_item(s.from[j])};
      plan = node(std::move(j_node));
      scope.insert(alias);
      plan = push_filters(plan);
    }
    std::vector<ExprPtr> rest;
    for (std::size_t i = 0; i < conjuncts.size(); ++i) {
      if (!used[i]) rest.push_back(conjuncts[i]);
    }
    return rest.empty() ? plan : filter(plan, conjoin(rest));
  }

  PlanPtr lower_windows(PlanPtr base, const std::vector<ExprPtr>& windows,
                        std::vector<SelectItem>& items) {
    const int first = window_counter_;
    window_counter_ += static_cast<int>(windows.size());

    PlanNode extend;
    extend.kind = PlanNode::Kind::Extend;
    extend.inputs = {std::move(base)};
    for (std::size_t i = 0; i < windows.size(); ++i) {
      const Expr& agg = *windows[i]->args[0];
      ExprPtr arg = agg.star_arg ? lit(Value(1)) : agg.args[0];
      extend.items.push_back({arg, "__w" + std::to_string(first + static_cast<int>(i))});
    }
    PlanPtr plan = node(std::move(extend));
    const PlanPtr rows = plan;

    for (std::size_t i = 0; i < windows.size(); ++i) {
      const std::string id = std::to_string(first + static_cast<int>(i));
      const Expr& agg = *windows[i]->args[0];
      PlanNode group;
      group.kind = PlanNode::Kind::Aggregate;
      group.inputs = {rows};
      std::vector<std::string> renamed;
      std::vector<JoinPair> pairs;
      for (std::size_t j = 0; j < windows[i]->partition_by.size(); ++j) {
        const std::string col_name =
            column_name_of(windows[i]->partition_by[j], "a PARTITION BY entry");
        group.group_by.push_back(col_name);
        const std::string part = "__wp" + id + "_" + std::to_string(j);
        renamed.push_back(part);
        pairs.push_back({col_name, part});
      }
      group.aggs.push_back({agg.name, col("__w" + id), "__ws" + id});
      renamed.push_back("__ws" + id);

      PlanNode rename;
      rename.kind = PlanNode::Kind::Rename;
      rename.names = std::move(renamed);
      rename.inputs = {node(std::move(group))};

      PlanNode join;
      join.kind = pairs.empty() ? PlanNode::Kind::Cartesian : PlanNode::Kind::Join;
      join.pairs = std::move(pairs);
      join.inputs = {plan, node(std::move(rename))};
      plan = node(std::move(join));
    }

    for (auto& it : items) {
      it.expr = rewrite(it.expr, [&](const ExprPtr& e) -> ExprPtr {
        if (e->kind != Expr::Kind::Window) return nullptr;
        for (std::size_t i = 0; i < windows.size(); ++i) {
          if (*windows[i] == *e) return col("__ws" + std::to_string(first + static_cast<int>(i)));
        }
        return nullptr;
      });
    }
    return plan;
  }

  PlanPtr lower_aggregate(PlanPtr base, const std::vector<ExprPtr>& group_by,
                          const std::vector<ExprPtr>& aggs, std::vector<SelectItem>& items) {
    PlanNode n;
    n.kind = PlanNode::Kind::Aggregate;
    n.inputs = {std::move(base)};
    for (const auto& g : group_by) n.group_by.push_back(column_name_of(g, "a GROUP BY entry"));
    for (std::size_t i = 0; i < aggs.size(); ++i) {
      n.aggs.push_back({aggs[i]->name, aggs[i]->star_arg ? nullptr : aggs[i]->args[0],
                        "__a" + std::to_string(i)});
    }
    for (auto& it : items) {
      if (it.expr->kind == Expr::Kind::Star) {
        fail(ErrorCode::InvalidArgument, "select * cannot be combined with aggregation");
      }
      it.expr = rewrite(it.expr, [&](const ExprPtr& e) -> ExprPtr {
        if (e->kind != Expr::Kind::Aggregate) return nullptr;
        for (std::size_t i = 0; i < aggs.size(); ++i) {
          if (*aggs[i] == *e) return col("__a" + std::to_string(i));
        }
        return nullptr;
      });
    }
    return node(std::move(n));
  }
};

PlanPtr rename(PlanPtr in, const std::vector<std::string>& names) {
  PlanNode n;
  n.kind = PlanNode::Kind::Rename;
  n.names = names;
  n.inputs = {std::move(in)};
  return node(std::move(n));
}

std::string_view kind_name(PlanNode::Kind k) {
  switch (k) {
    case PlanNode::Kind::Scan: return "Scan";
    case PlanNode::Kind::SingleRow: return "SingleRow";
    case PlanNode::Kind::Qualify: return "Qualify";
    case PlanNode::Kind::Filter: return "Filter";
    case PlanNode::Kind::Join: return "Join";
    case PlanNode::Kind::Cartesian: return "Cartesian";
    case PlanNode::Kind::Aggregate: return "Aggregate";
    case PlanNode::Kind::Project: return "Project";
    case PlanNode::Kind::Extend: return "Extend";
    case PlanNode::Kind::Rename: return "Rename";
    case PlanNode::Kind::Union: return "Union";
  }
  return "?";
}

void explain_into(std::ostream& out, const PlanNode& n, int depth) {
  out << std::string(static_cast<std::size_t>(depth) * 2, ' ') << kind_name(n.kind);
  switch (n.kind) {
    case PlanNode::Kind::Scan:
      out << ' ' << n.name;
      if (n.alias != n.name) out << " as " << n.alias;
      break;
    case PlanNode::Kind::Qualify: out << ' ' << n.alias; break;
    case PlanNode::Kind::Filter: out << ' ' << to_sql(*n.predicate); break;
    case PlanNode::Kind::Join:
      for (std::size_t i = 0; i < n.pairs.size(); ++i) {
        out << (i ? ", " : " ") << n.pairs[i].left << " = " << n.pairs[i].right;
      }
      break;
    case PlanNode::Kind::Aggregate:
      out << " by [";
      for (std::size_t i = 0; i < n.group_by.size(); ++i) out << (i ? ", " : "") << n.group_by[i];
      out << "]";
      for (const auto& a : n.aggs) {
        out << ' ' << a.output << '=' << a.function << '('
            << (a.input ? to_sql(*a.input) : std::string("*")) << ')';
      }
      break;
    case PlanNode::Kind::Project:
    case PlanNode::Kind::Extend:
      for (std::size_t i = 0; i < n.items.size(); ++i) {
        out << (i ? ", " : " ") << to_sql(*n.items[i].expr);
        if (!n.items[i].name.empty()) out << " as " << n.items[i].name;
      }
      break;
    case PlanNode::Kind::Rename:
      for (std::size_t i = 0; i < n.names.size(); ++i) out << (i ? ", " : " ") << n.names[i];
      break;
    default: break;
  }
  out << '\n';
  for (const auto& in : n.inputs) explain_into(out, *in, depth + 1);
}

}  // namespace

std::string explain(const PlanNode& n) {
  std::ostringstream out;
  explain_into(out, n, 0);
  return out.str();
}

PlanPtr lower_select(const SelectAst& s, bool windows_allowed, const FunctionRegistry& functions) {
  return SelectLowering(functions).lower(s, windows_allowed);
}

LogicalPlan lower(const QueryAst& q, const DependencyGraph& graph,
                  const FunctionRegistry& functions) {
  LogicalPlan plan;
  if (!q.recursive()) {
    plan.final = lower_select(q.effective_final(), true, functions);
    return plan;
  }
  plan.recursive_name = q.recursive_name;
  plan.columns = q.columns;
  plan.mode = q.union_mode();
  plan.key = q.update_key();
  plan.max_recursion = q.max_recursion.value_or(kDefaultMaxRecursion);

  std::map<std::string, const ComputedBy*> temps;
  for (const auto& b : q.branches) {
    for (const auto& c : b.computed_by) temps[c.name] = &c;
  }
  auto temp_plan = [&](const std::string& name) {
    const ComputedBy& c = *temps.at(name);
    return TempPlan{name, rename(lower_select(c.query, true, functions), c.columns)};
  };
  for (const auto& n : graph.init_order) plan.init_temporaries.push_back(temp_plan(n));
  for (const auto& n : graph.step_order) plan.temporaries.push_back(temp_plan(n));

  plan.init = rename(lower_select(q.branches.front().query, false, functions), q.columns);
  std::vector<PlanPtr> steps;
  for (std::size_t b = 1; b < q.branches.size(); ++b) {
    steps.push_back(rename(lower_select(q.branches[b].query, true, functions), q.columns));
  }
  plan.step = steps.size() == 1 ? steps.front() : make(PlanNode::Kind::Union, std::move(steps));
  plan.final = lower_select(q.effective_final(), false, functions);
  return plan;
}

}  // namespace emview::sql
