#include "emview/database.hpp"

#include <algorithm>
#include <unordered_set>

#include "emview/error.hpp"

namespace emview {

void Database::create_table(const std::string& name, Relation rel) {
  std::unique_lock lock(mu_);
  if (tables_.contains(name)) fail(ErrorCode::InvalidArgument, "relation '" + name + "' already exists");
  tables_.emplace(name, std::move(rel).with_name(name));
}

void Database::put(const std::string& name, Relation rel) {
  std::unique_lock lock(mu_);
  tables_.insert_or_assign(name, std::move(rel).with_name(name));
}

void Database::drop(const std::string& name) {
  std::unique_lock lock(mu_);
  tables_.erase(name);
}

bool Database::has(std::string_view name) const {
  std::shared_lock lock(mu_);
  return tables_.find(name) != tables_.end();
}

Relation Database::get(std::string_view name) const {
  std::shared_lock lock(mu_);
  auto it = tables_.find(name);
  if (it == tables_.end()) fail(ErrorCode::UnknownRelation, "no relation named '" + std::string(name) + "'");
  return it->second;
}

std::vector<std::string> Database::names() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  for (const auto& [n, r] : tables_) out.push_back(n);
  return out;
}

void Database::set_param(const std::string& name, Value v) {
  std::unique_lock lock(mu_);
  params_.insert_or_assign(name, std::move(v));
}

ParamMap Database::params() const {
  std::shared_lock lock(mu_);
  return params_;
}

Catalog Database::catalog() const {
  std::shared_lock lock(mu_);
  Catalog c;
  for (const auto& [n, r] : tables_) c.put(n, r);
  c.params = params_;
  return c;
}

std::vector<TriggerDef> Database::matching(const std::string& table, TriggerTiming timing,
                                           TriggerEvent event, TriggerGranularity g) const {
  std::shared_lock lock(mu_);
  std::vector<TriggerDef> out;
  for (const auto& t : triggers_) {
    if (t.table == table && t.timing == timing && t.event == event && t.granularity == g) {
      out.push_back(t);
    }
  }
  return out;
}

void Database::fire(const std::string& table, TriggerTiming timing, TriggerEvent event,
                    const Relation& rows) {
  const auto stmt = matching(table, timing, event, TriggerGranularity::Statement);
  const auto per_row = matching(table, timing, event, TriggerGranularity::Row);
  // Before triggers: statement level first; after triggers: row level first.
  auto fire_statement = [&] {
    for (const auto& t : stmt) {
      TriggerContext ctx{*this, table, rows, nullptr};
      t.action(ctx);
    }
  };
  auto fire_rows = [&] {
    for (const Row& row : rows.rows()) {
      for (const auto& t : per_row) {
        TriggerContext ctx{*this, table, rows, &row};
        t.action(ctx);
      }
    }
  };
  if (timing == TriggerTiming::Before) {
    fire_statement();
    fire_rows();
  } else {
    fire_rows();
    fire_statement();
  }
}

std::size_t Database::insert(const std::string& table, const Relation& rows) {
  std::lock_guard statement(statement_mu_);
  const Relation current = get(table);
  const Schema& schema = current.schema();
  if (rows.schema().size() != schema.size()) {
    fail(ErrorCode::SchemaMismatch, "insert into " + table + ": " +
                                        std::to_string(rows.schema().size()) + " columns, table has " +
                                        std::to_string(schema.size()));
  }
  std::vector<Row> incoming;
  for (const Row& row : rows.rows()) {
    Row r = row;
    for (std::size_t i = 0; i < schema.size(); ++i) {
      if (schema[i].type.type == ValueType::Real && r[i].is_int()) r[i] = Value(r[i].as_real());
    }
    incoming.push_back(std::move(r));
  }
  // Validates types and shapes against the table schema.
  const Relation staged(schema, incoming);

  fire(table, TriggerTiming::Before, TriggerEvent::Insert, staged);
  {
    std::unique_lock lock(mu_);
    const Relation& cur = tables_.at(table);
    std::vector<Row> all(cur.rows().begin(), cur.rows().end());
    all.insert(all.end(), staged.rows().begin(), staged.rows().end());
    tables_.insert_or_assign(table, Relation(schema, std::move(all), cur.key()).with_name(table));
  }
  fire(table, TriggerTiming::After, TriggerEvent::Insert, staged);
  return staged.size();
}

std::size_t Database::delete_where(const std::string& table,
                                   const std::function<bool(const Row&)>& pred) {
  std::lock_guard statement(statement_mu_);
  const Relation current = get(table);
  std::vector<Row> gone;
  std::vector<Row> kept;
  for (const Row& row : current.rows()) (pred(row) ? gone : kept).push_back(row);
  const Relation deleted = Relation::unchecked(current.schema(), std::move(gone));

  fire(table, TriggerTiming::Before, TriggerEvent::Delete, deleted);
  {
    std::unique_lock lock(mu_);
    tables_.insert_or_assign(
        table, Relation::unchecked(current.schema(), std::move(kept), current.key()).with_name(table));
  }
  fire(table, TriggerTiming::After, TriggerEvent::Delete, deleted);
  return deleted.size();
}

std::size_t Database::delete_ids(const std::string& table, const std::vector<Value>& ids,
                                 std::string_view id_column) {
  const std::size_t idx = get(table).schema().index_of(id_column);
  std::unordered_set<std::string> wanted;
  for (const auto& v : ids) wanted.insert(format_value(v));
  return delete_where(table, [&](const Row& row) { return wanted.contains(format_value(row[idx])); });
}

void Database::create_trigger(TriggerDef def) {
  std::unique_lock lock(mu_);
  if (!tables_.contains(def.table)) {
    fail(ErrorCode::UnknownRelation, "trigger " + def.name + " on unknown table " + def.table);
  }
  if (std::any_of(triggers_.begin(), triggers_.end(), [&](const TriggerDef& t) { return t.name == def.name; })) {
    fail(ErrorCode::InvalidArgument, "trigger " + def.name + " already exists");
  }
  triggers_.push_back(std::move(def));
}

void Database::drop_trigger(std::string_view name) {
  std::unique_lock lock(mu_);
  std::erase_if(triggers_, [&](const TriggerDef& t) { return t.name == name; });
}

std::vector<std::string> Database::trigger_names() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  for (const auto& t : triggers_) out.push_back(t.name);
  return out;
}

}  // namespace emview
