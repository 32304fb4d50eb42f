#include "emview/sql/validate.hpp"

#include <algorithm>
#include <map>

#include "emview/error.hpp"

namespace emview::sql {
namespace {

void add_node(DependencyGraph& g, const std::string& n) {
  if (std::find(g.nodes.begin(), g.nodes.end(), n) == g.nodes.end()) g.nodes.push_back(n);
}

void add_edge(DependencyGraph& g, const std::string& reader, const std::string& read) {
  add_node(g, reader);
  add_node(g, read);
  const auto e = std::make_pair(reader, read);
  if (std::find(g.edges.begin(), g.edges.end(), e) == g.edges.end()) g.edges.push_back(e);
}

// Kahn's algorithm; ties go to declaration order.
std::vector<std::string> order_temporaries(const std::vector<const ComputedBy*>& temps) {
  std::map<std::string, std::vector<std::string>> deps;
  for (const auto* c : temps) {
    std::vector<std::string> d;
    for (const auto& r : referenced_relations(c->query)) {
      const bool is_temp = std::any_of(temps.begin(), temps.end(),
                                       [&](const ComputedBy* t) { return t->name == r; });
      if (is_temp) d.push_back(r);
    }
    deps[c->name] = std::move(d);
  }
  std::vector<std::string> order;
  std::vector<bool> done(temps.size(), false);
  while (order.size() < temps.size()) {
    bool progressed = false;
    for (std::size_t i = 0; i < temps.size(); ++i) {
      if (done[i]) continue;
      const auto& d = deps[temps[i]->name];
      const bool ready = std::all_of(d.begin(), d.end(), [&](const std::string& n) {
        return std::find(order.begin(), order.end(), n) != order.end();
      });
      if (ready) {
        order.push_back(temps[i]->name);
        done[i] = true;
        progressed = true;
        break;
      }
    }
    if (!progressed) {
      std::string cycle;
      for (std::size_t i = 0; i < temps.size(); ++i) {
        if (done[i]) continue;
        if (!cycle.empty()) cycle += ", ";
        cycle += temps[i]->name;
      }
      fail(ErrorCode::CyclicComputedBy, "computed-by relations depend on each other cyclically: " +
                                            cycle);
    }
  }
  return order;
}

}  // namespace

bool DependencyGraph::reads(std::string_view reader, std::string_view read) const {
  return std::any_of(edges.begin(), edges.end(),
                     [&](const auto& e) { return e.first == reader && e.second == read; });
}

DependencyGraph validate(const QueryAst& q,
                         const std::set<std::string, std::less<>>& base_tables) {
  DependencyGraph g;
  auto check_known = [&](const std::string& name, const std::string& reader,
                         const std::set<std::string>& visible) {
    if (visible.contains(name) || base_tables.contains(name)) return;
    fail(ErrorCode::UnknownRelation,
         "relation '" + name + "' read by " + reader + " is neither a base table, a computed-by "
         "relation, nor the recursive relation");
  };

  if (!q.recursive()) {
    const SelectAst& s = q.effective_final();
    for (const auto& r : referenced_relations(s)) {
      check_known(r, "the query", {});
      add_edge(g, "result", r);
    }
    return g;
  }

  const std::string& rec = q.recursive_name;
  const std::string next = rec + "@next";

  // (a) union modes
  const auto ubu = std::count_if(q.unions.begin(), q.unions.end(), [](const UnionOp& u) {
    return u.mode == UnionMode::UnionByUpdate;
  });
  if (ubu > 1) {
    fail(ErrorCode::MultipleUnionByUpdate,
         "UNION BY UPDATE appears " + std::to_string(ubu) + " times in " + rec +
             "; it may be used at most once");
  }
  if (ubu == 1 && q.unions.size() > 1) {
    fail(ErrorCode::MultipleUnionByUpdate,
         "UNION BY UPDATE cannot be combined with UNION ALL in " + rec);
  }
  if (q.branches.size() < 2) {
    fail(ErrorCode::SyntaxError, "recursive relation " + rec + " needs an initial and a recursive query");
  }

  // (e) update key
  if (ubu == 1) {
    const auto key = q.update_key();
    if (key.empty()) fail(ErrorCode::InvalidUpdateKey, "UNION BY UPDATE in " + rec + " names no key");
    for (const auto& k : key) {
      if (std::find(q.columns.begin(), q.columns.end(), k) == q.columns.end()) {
        fail(ErrorCode::InvalidUpdateKey,
             "update key '" + k + "' is not a declared column of " + rec);
      }
    }
  }

  std::set<std::string> temp_names;
  for (const auto& b : q.branches) {
    for (const auto& c : b.computed_by) {
      if (c.name == rec || !temp_names.insert(c.name).second) {
        fail(ErrorCode::InvalidArgument, "computed-by relation '" + c.name + "' is defined twice");
      }
    }
  }

  add_node(g, rec);
  for (std::size_t bi = 0; bi < q.branches.size(); ++bi) {
    const Branch& b = q.branches[bi];
    const bool init = bi == 0;
    std::set<std::string> visible;
    std::vector<const ComputedBy*> temps;
    for (const auto& c : b.computed_by) {
      visible.insert(c.name);
      temps.push_back(&c);
    }
    if (!init) visible.insert(rec);

    // (b) non-recursive computed-by bodies
    for (const auto* c : temps) {
      for (const auto& r : referenced_relations(c->query)) {
        if (r == c->name) {
          fail(ErrorCode::RecursiveComputedBy,
               "computed-by relation '" + c->name + "' reads itself");
        }
        check_known(r, "computed-by relation '" + c->name + "'", visible);
        add_edge(g, c->name, r);
      }
    }
    // (c) acyclic temporaries
    auto order = order_temporaries(temps);
    auto& dest = init ? g.init_order : g.step_order;
    dest.insert(dest.end(), order.begin(), order.end());

    // (d) branch body reads
    for (const auto& r : referenced_relations(b.query)) {
      check_known(r, init ? "the initial query of " + rec : "the recursive query of " + rec,
                  visible);
      add_edge(g, init ? rec : next, r);
    }
  }
  if (q.final_query) {
    for (const auto& r : referenced_relations(*q.final_query)) {
      check_known(r, "the final query", {rec});
      add_edge(g, "result", r);
    }
  }
  return g;
}

}  // namespace emview::sql
