#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "emview/value.hpp"

namespace emview {

struct Attribute {
  std::string name;
  CellType type;

  friend bool operator==(const Attribute&, const Attribute&) = default;
};

/// Ordered attribute list. Names may be qualified ("r.k"); lookups by a bare
/// name ("k") match a unique qualified attribute with that suffix.
class Schema {
 public:
  Schema() = default;
  /// Throws DuplicateAttribute when two attributes share a name.
  explicit Schema(std::vector<Attribute> attrs);

  std::size_t size() const noexcept { return attrs_.size(); }
  const Attribute& operator[](std::size_t i) const { return attrs_[i]; }
  const std::vector<Attribute>& attributes() const noexcept { return attrs_; }
  auto begin() const noexcept { return attrs_.begin(); }
  auto end() const noexcept { return attrs_.end(); }

  /// Index of `name`, or nothing when absent. Throws AmbiguousAttribute when a
  /// bare name matches several qualified attributes.
  std::optional<std::size_t> find(std::string_view name) const;
  /// Like find, but throws UnknownAttribute when absent.
  std::size_t index_of(std::string_view name) const;

  std::vector<std::string> names() const;

  friend bool operator==(const Schema&, const Schema&) = default;

 private:
  std::vector<Attribute> attrs_;
};

/// Part of `name` after the last '.'.
std::string_view bare_name(std::string_view name);

using Row = std::vector<Value>;

/// Immutable bag of rows conforming to a schema, optionally keyed. Copies share
/// the row storage.
class Relation {
 public:
  Relation();
  /// Validates conformance (arity, type tags, shapes) and key uniqueness.
  Relation(Schema schema, std::vector<Row> rows,
           std::optional<std::vector<std::string>> key = std::nullopt);

  /// Skips validation; for operator implementations whose outputs conform by construction.
  static Relation unchecked(Schema schema, std::vector<Row> rows,
                            std::optional<std::vector<std::string>> key = std::nullopt);

  const Schema& schema() const noexcept { return schema_; }
  std::span<const Row> rows() const noexcept { return *rows_; }
  const Row& row(std::size_t i) const { return (*rows_)[i]; }
  std::size_t size() const noexcept { return rows_->size(); }
  bool empty() const noexcept { return rows_->empty(); }
  const std::optional<std::vector<std::string>>& key() const noexcept { return key_; }

  /// Optional relation name, used to qualify colliding attributes in joins.
  const std::string& name() const noexcept { return name_; }
  Relation with_name(std::string name) const;
  /// Same rows under new attribute names (positional).
  Relation renamed(const std::vector<std::string>& names) const;
  /// Same rows with a declared key; validates uniqueness.
  Relation with_key(std::vector<std::string> key) const;

  /// Cell lookup by attribute name.
  const Value& at(std::size_t row, std::string_view attr) const;

 private:
  Schema schema_;
  std::shared_ptr<const std::vector<Row>> rows_;
  std::optional<std::vector<std::string>> key_;
  std::string name_;
};

/// Multiset equality with bitwise real comparison; row order is ignored.
bool same_rows(const Relation& a, const Relation& b);

/// Rows sorted by the total value order, for deterministic output and comparison.
std::vector<Row> sorted_rows(const Relation& r);

/// Throws DuplicateKey when two rows agree on all `key_indexes`.
void check_key_unique(std::span<const Row> rows, std::span<const std::size_t> key_indexes,
                      std::string_view what);

struct RowHash {
  std::size_t operator()(const Row& r) const;
};

}  // namespace emview
