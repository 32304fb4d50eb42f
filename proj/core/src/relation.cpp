#include "emview/relation.hpp"

#include <algorithm>
#include <unordered_set>

#include "emview/error.hpp"

namespace emview {

std::string_view bare_name(std::string_view name) {
  const auto dot = name.rfind('.');
  return dot == std::string_view::npos ? name : name.substr(dot + 1);
}

Schema::Schema(std::vector<Attribute> attrs) : attrs_(std::move(attrs)) {
  std::unordered_set<std::string> seen;
  for (const auto& a : attrs_) {
    if (!seen.insert(a.name).second) {
      fail(ErrorCode::DuplicateAttribute, "duplicate attribute '" + a.name + "'");
    }
  }
}

std::optional<std::size_t> Schema::find(std::string_view name) const {
  for (std::size_t i = 0; i < attrs_.size(); ++i)
    if (attrs_[i].name == name) return i;
  if (name.find('.') != std::string_view::npos) {
    // Qualified lookup against bare attributes is not allowed to guess.
    return std::nullopt;
  }
  std::optional<std::size_t> hit;
  for (std::size_t i = 0; i < attrs_.size(); ++i) {
    if (bare_name(attrs_[i].name) == name) {
      if (hit) fail(ErrorCode::AmbiguousAttribute, "attribute '" + std::string(name) + "' is ambiguous");
      hit = i;
    }
  }
  return hit;
}

std::size_t Schema::index_of(std::string_view name) const {
  if (auto i = find(name)) return *i;
  std::string known;
  for (const auto& a : attrs_) known += (known.empty() ? "" : ", ") + a.name;
  fail(ErrorCode::UnknownAttribute,
       "unknown attribute '" + std::string(name) + "' (have: " + known + ")");
}

std::vector<std::string> Schema::names() const {
  std::vector<std::string> out;
  out.reserve(attrs_.size());
  for (const auto& a : attrs_) out.push_back(a.name);
  return out;
}

std::size_t RowHash::operator()(const Row& r) const {
  std::size_t h = r.size();
  for (const auto& v : r) h ^= v.hash() + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

namespace {

std::vector<std::size_t> key_indexes(const Schema& schema, const std::vector<std::string>& key) {
  std::vector<std::size_t> idx;
  idx.reserve(key.size());
  for (const auto& k : key) idx.push_back(schema.index_of(k));
  return idx;
}

bool cell_conforms(const Value& v, const CellType& t) {
  if (v.type() != t.type) return false;
  if (t.type == ValueType::Vec) return v.as_vec().size() == t.rows;
  if (t.type == ValueType::Mat) return v.as_mat().rows() == t.rows && v.as_mat().cols() == t.cols;
  return true;
}

}  // namespace

void check_key_unique(std::span<const Row> rows, std::span<const std::size_t> key_idx,
                      std::string_view what) {
  std::unordered_set<Row, RowHash> seen;
  seen.reserve(rows.size());
  for (const auto& row : rows) {
    Row k;
    k.reserve(key_idx.size());
    for (auto i : key_idx) k.push_back(row[i]);
    if (!seen.insert(std::move(k)).second) {
      std::string desc;
      for (auto i : key_idx) desc += (desc.empty() ? "" : ",") + format_value(row[i]);
      fail(ErrorCode::DuplicateKey, std::string(what) + ": duplicate key (" + desc + ")");
    }
  }
}

Relation::Relation() : rows_(std::make_shared<const std::vector<Row>>()) {}

Relation::Relation(Schema schema, std::vector<Row> rows, std::optional<std::vector<std::string>> key)
    : schema_(std::move(schema)),
      rows_(std::make_shared<const std::vector<Row>>(std::move(rows))),
      key_(std::move(key)) {
  for (std::size_t r = 0; r < rows_->size(); ++r) {
    const Row& row = (*rows_)[r];
    if (row.size() != schema_.size()) {
      fail(ErrorCode::SchemaMismatch, "row " + std::to_string(r) + " has " +
                                          std::to_string(row.size()) + " cells, schema has " +
                                          std::to_string(schema_.size()));
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (!cell_conforms(row[c], schema_[c].type)) {
        fail(ErrorCode::SchemaMismatch, "row " + std::to_string(r) + " attribute '" +
                                            schema_[c].name + "': expected " +
                                            to_string(schema_[c].type) + ", got " +
                                            to_string(row[c].cell_type()));
      }
    }
  }
  if (key_) {
    const auto idx = key_indexes(schema_, *key_);
    check_key_unique(*rows_, idx, "relation");
  }
}

Relation Relation::unchecked(Schema schema, std::vector<Row> rows,
                             std::optional<std::vector<std::string>> key) {
  Relation r;
  r.schema_ = std::move(schema);
  r.rows_ = std::make_shared<const std::vector<Row>>(std::move(rows));
  r.key_ = std::move(key);
  return r;
}

Relation Relation::with_name(std::string name) const {
  Relation r = *this;
  r.name_ = std::move(name);
  return r;
}

Relation Relation::renamed(const std::vector<std::string>& names) const {
  if (names.size() != schema_.size()) {
    fail(ErrorCode::SchemaMismatch, "rename: " + std::to_string(names.size()) +
                                        " names for " + std::to_string(schema_.size()) +
                                        " attributes");
  }
  std::vector<Attribute> attrs = schema_.attributes();
  for (std::size_t i = 0; i < attrs.size(); ++i) attrs[i].name = names[i];
  Relation r = *this;
  r.schema_ = Schema(std::move(attrs));
  r.key_.reset();
  return r;
}

Relation Relation::with_key(std::vector<std::string> key) const {
  const auto idx = key_indexes(schema_, key);
  check_key_unique(*rows_, idx, "relation");
  Relation r = *this;
  r.key_ = std::move(key);
  return r;
}

const Value& Relation::at(std::size_t row, std::string_view attr) const {
  return (*rows_)[row][schema_.index_of(attr)];
}

std::vector<Row> sorted_rows(const Relation& r) {
  std::vector<Row> rows(r.rows().begin(), r.rows().end());
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
      const int c = compare_total(a[i], b[i]);
      if (c != 0) return c < 0;
    }
    return a.size() < b.size();
  });
  return rows;
}

bool same_rows(const Relation& a, const Relation& b) {
  if (a.size() != b.size()) return false;
  if (a.schema().size() != b.schema().size()) return false;
  return sorted_rows(a) == sorted_rows(b);
}

}  // namespace emview
