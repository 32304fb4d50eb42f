#include <sstream>

#include "emview/sql/parser.hpp"

namespace emview::sql {
namespace {

std::string join_names(const std::vector<std::string>& names) {
  std::string s;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) s += ", ";
    s += names[i];
  }
  return s;
}

void print_select(std::ostream& out, const SelectAst& s) {
  out << "select ";
  for (std::size_t i = 0; i < s.projections.size(); ++i) {
    if (i) out << ", ";
    out << to_sql(*s.projections[i].expr);
    if (!s.projections[i].alias.empty()) out << " as " << s.projections[i].alias;
  }
  if (!s.from.empty()) {
    out << " from ";
    for (std::size_t i = 0; i < s.from.size(); ++i) {
      if (i) out << ", ";
      const FromItem& f = s.from[i];
      if (f.subquery) {
        out << '(';
        print_select(out, *f.subquery);
        out << ") as " << f.alias;
      } else {
        out << f.table;
        if (!f.alias.empty()) out << " as " << f.alias;
      }
    }
  }
  if (s.where) out << " where " << to_sql(*s.where);
  if (!s.group_by.empty()) {
    out << " group by ";
    for (std::size_t i = 0; i < s.group_by.size(); ++i) {
      if (i) out << ", ";
      out << to_sql(*s.group_by[i]);
    }
  }
}

}  // namespace

std::string pretty_print(const SelectAst& s) {
  std::ostringstream out;
  print_select(out, s);
  return out.str();
}

std::string pretty_print(const QueryAst& q) {
  std::ostringstream out;
  if (q.recursive()) {
    out << "with " << q.recursive_name << "(" << join_names(q.columns) << ") as (\n";
    for (std::size_t b = 0; b < q.branches.size(); ++b) {
      if (b > 0) {
        const UnionOp& u = q.unions[b - 1];
        if (u.mode == UnionMode::UnionAll) {
          out << "  union all\n";
        } else {
          out << "  union by update";
          if (!u.key.empty()) out << ' ' << join_names(u.key);
          out << '\n';
        }
      }
      const Branch& br = q.branches[b];
      out << "  (";
      print_select(out, br.query);
      if (!br.computed_by.empty()) {
        out << "\n   computed by";
        for (const auto& c : br.computed_by) {
          out << "\n     " << c.name << "(" << join_names(c.columns) << ") as ";
          print_select(out, c.query);
        }
      }
      out << ")\n";
    }
    if (q.max_recursion) out << "  maxrecursion " << *q.max_recursion << '\n';
    out << ")";
    if (q.final_query) {
      out << '\n';
      print_select(out, *q.final_query);
    }
  } else if (q.final_query) {
    print_select(out, *q.final_query);
  }
  out << '\n';
  return out.str();
}

}  // namespace emview::sql
