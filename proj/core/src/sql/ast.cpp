#include "emview/sql/ast.hpp"

#include <algorithm>

namespace emview::sql {

UnionMode QueryAst::union_mode() const {
  for (const auto& u : unions) {
    if (u.mode == UnionMode::UnionByUpdate) return UnionMode::UnionByUpdate;
  }
  return UnionMode::UnionAll;
}

std::vector<std::string> QueryAst::update_key() const {
  for (const auto& u : unions) {
    if (u.mode == UnionMode::UnionByUpdate) return u.key;
  }
  return {};
}

SelectAst QueryAst::effective_final() const {
  if (final_query) return *final_query;
  SelectAst s;
  s.projections.push_back({star(), ""});
  s.from.push_back({recursive_name, nullptr, ""});
  return s;
}

bool operator==(const FromItem& a, const FromItem& b) {
  if (a.table != b.table || a.alias != b.alias) return false;
  if (!a.subquery || !b.subquery) return !a.subquery && !b.subquery;
  return *a.subquery == *b.subquery;
}

bool operator==(const SelectItem& a, const SelectItem& b) {
  return a.alias == b.alias && expr_equal(a.expr, b.expr);
}

bool operator==(const SelectAst& a, const SelectAst& b) {
  return a.projections == b.projections && a.from == b.from && expr_equal(a.where, b.where) &&
         std::equal(a.group_by.begin(), a.group_by.end(), b.group_by.begin(), b.group_by.end(),
                    expr_equal);
}

bool operator==(const ComputedBy& a, const ComputedBy& b) {
  return a.name == b.name && a.columns == b.columns && a.query == b.query;
}

bool operator==(const Branch& a, const Branch& b) {
  return a.query == b.query && a.computed_by == b.computed_by;
}

bool operator==(const UnionOp& a, const UnionOp& b) { return a.mode == b.mode && a.key == b.key; }

bool operator==(const QueryAst& a, const QueryAst& b) {
  return a.recursive_name == b.recursive_name && a.columns == b.columns &&
         a.branches == b.branches && a.unions == b.unions &&
         a.max_recursion == b.max_recursion && a.final_query == b.final_query;
}

std::vector<std::string> referenced_relations(const SelectAst& s) {
  std::vector<std::string> out;
  for (const auto& f : s.from) {
    if (f.subquery) {
      for (auto& n : referenced_relations(*f.subquery)) {
        if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(std::move(n));
      }
    } else if (std::find(out.begin(), out.end(), f.table) == out.end()) {
      out.push_back(f.table);
    }
  }
  return out;
}

}  // namespace emview::sql
