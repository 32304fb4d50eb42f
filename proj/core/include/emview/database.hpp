#pragma once

#include <cstdint>
#include <functional>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "emview/eval.hpp"
#include "emview/relation.hpp"

namespace emview {

class Database;

enum class TriggerTiming { Before, After };
enum class TriggerEvent { Insert, Delete };
enum class TriggerGranularity { Statement, Row };

/// What a trigger action sees: the statement's full row set, and for row-level
/// triggers the current row.
struct TriggerContext {
  Database& db;
  const std::string& table;
  const Relation& rows;
  const Row* row = nullptr;
};

using TriggerAction = std::function<void(TriggerContext&)>;

struct TriggerDef {
  std::string name;
  std::string table;
  TriggerTiming timing = TriggerTiming::Before;
  TriggerEvent event = TriggerEvent::Insert;
  TriggerGranularity granularity = TriggerGranularity::Statement;
  TriggerAction action;
};

/// Named relations plus triggers on insert/delete. Reads take a shared lock;
/// table replacement is atomic, so readers see a relation either before or
/// after a statement's effect on it. Mutating statements are serialized.
///
/// For one insert or delete statement the firing order is: before-statement
/// triggers, before-row triggers for each row, the mutation, after-row
/// triggers for each row, after-statement triggers; triggers of the same kind
/// fire in creation order.
class Database {
 public:
  void create_table(const std::string& name, Relation rel);
  /// Replaces or creates the relation atomically (used for model views).
  void put(const std::string& name, Relation rel);
  void drop(const std::string& name);
  bool has(std::string_view name) const;
  /// Snapshot of one relation; throws UnknownRelation.
  Relation get(std::string_view name) const;
  std::vector<std::string> names() const;

  void set_param(const std::string& name, Value v);
  ParamMap params() const;

  /// Catalog snapshot for plan evaluation.
  Catalog catalog() const;

  /// Appends rows (schema-checked, Int widened to Real where needed) and fires triggers.
  std::size_t insert(const std::string& table, const Relation& rows);
  /// Deletes rows satisfying `pred` and fires triggers with the deleted rows.
  std::size_t delete_where(const std::string& table, const std::function<bool(const Row&)>& pred);
  /// Deletes rows whose `id_column` value is in `ids`.
  std::size_t delete_ids(const std::string& table, const std::vector<Value>& ids,
                         std::string_view id_column = "id");

  void create_trigger(TriggerDef def);
  void drop_trigger(std::string_view name);
  std::vector<std::string> trigger_names() const;

 private:
  mutable std::shared_mutex mu_;
  std::recursive_mutex statement_mu_;
  std::map<std::string, Relation, std::less<>> tables_;
  ParamMap params_;
  std::vector<TriggerDef> triggers_;

  std::vector<TriggerDef> matching(const std::string& table, TriggerTiming timing,
                                   TriggerEvent event, TriggerGranularity g) const;
  void fire(const std::string& table, TriggerTiming timing, TriggerEvent event,
            const Relation& rows);
};

}  // namespace emview
