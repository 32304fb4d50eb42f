#include "emview/operators.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "emview/error.hpp"

namespace emview {

Relation select(const Relation& rel, const Expr& predicate, const EvalContext& ctx) {
  const BoundExpr pred = BoundExpr::bind(predicate, rel.schema(), ctx);
  if (!pred.type().numeric()) {
    fail(ErrorCode::TypeMismatch, "predicate must be numeric, got " + to_string(pred.type()));
  }
  std::vector<Row> out;
  for (const Row& row : rel.rows()) {
    if (pred.test(row)) out.push_back(row);
  }
  return Relation::unchecked(rel.schema(), std::move(out), rel.key()).with_name(rel.name());
}

Relation project(const Relation& rel, const std::vector<ProjectItem>& items,
                 const EvalContext& ctx) {
  std::vector<BoundExpr> bound;
  std::vector<Attribute> attrs;
  bound.reserve(items.size());
  for (const auto& item : items) {
    bound.push_back(BoundExpr::bind(*item.expr, rel.schema(), ctx));
    attrs.push_back({item.name, bound.back().type()});
  }
  Schema schema(std::move(attrs));
  std::vector<Row> out;
  out.reserve(rel.size());
  for (const Row& row : rel.rows()) {
    Row r;
    r.reserve(bound.size());
    for (const auto& b : bound) r.push_back(b.eval(row));
    out.push_back(std::move(r));
  }
  return Relation::unchecked(std::move(schema), std::move(out));
}

namespace {

// Join and grouping keys: numeric cells compare by value across Int/Real.
Value key_cell(const Value& v) {
  switch (v.type()) {
    case ValueType::Int:
    case ValueType::Real: {
      double d = v.as_real();
      if (d == 0.0) d = 0.0;
      return Value(d);
    }
    case ValueType::Text:
      return v;
    default:
      fail(ErrorCode::TypeMismatch, "vector or matrix attributes cannot be join keys");
  }
}

void check_key_types(const CellType& a, const CellType& b, std::string_view la,
                     std::string_view lb) {
  const bool ok = (a.numeric() && b.numeric()) ||
                  (a.type == ValueType::Text && b.type == ValueType::Text);
  if (!ok) {
    fail(ErrorCode::TypeMismatch, "cannot join " + std::string(la) + " (" + to_string(a) +
                                      ") with " + std::string(lb) + " (" + to_string(b) + ")");
  }
}

Schema concat_schema(const Relation& left, const Relation& right) {
  std::vector<Attribute> attrs = left.schema().attributes();
  const std::string qual = right.name().empty() ? "right" : right.name();
  for (const auto& a : right.schema()) {
    Attribute out = a;
    const bool collides = std::any_of(left.schema().begin(), left.schema().end(),
                                      [&](const Attribute& l) { return l.name == a.name; });
    if (collides) out.name = qual + "." + std::string(bare_name(a.name));
    attrs.push_back(std::move(out));
  }
  return Schema(std::move(attrs));
}

struct KeyIndexes {
  std::vector<std::size_t> left;
  std::vector<std::size_t> right;
};

KeyIndexes resolve_pairs(const Relation& left, const Relation& right,
                         const std::vector<JoinPair>& on) {
  KeyIndexes k;
  for (const auto& p : on) {
    k.left.push_back(left.schema().index_of(p.left));
    k.right.push_back(right.schema().index_of(p.right));
    check_key_types(left.schema()[k.left.back()].type, right.schema()[k.right.back()].type,
                    p.left, p.right);
  }
  return k;
}

Row extract_key(const Row& row, const std::vector<std::size_t>& idx) {
  Row k;
  k.reserve(idx.size());
  for (std::size_t i : idx) k.push_back(key_cell(row[i]));
  return k;
}

using KeyTable = std::unordered_map<Row, std::vector<std::size_t>, RowHash>;

KeyTable build_table(const Relation& rel, const std::vector<std::size_t>& idx) {
  KeyTable table;
  table.reserve(rel.size());
  for (std::size_t i = 0; i < rel.size(); ++i) {
    table[extract_key(rel.row(i), idx)].push_back(i);
  }
  return table;
}

void check_union_compatible(const Relation& r, const Relation& s, std::string_view op) {
  const bool ok = r.schema().size() == s.schema().size() &&
                  std::equal(r.schema().begin(), r.schema().end(), s.schema().begin(),
                             [](const Attribute& a, const Attribute& b) { return a.type == b.type; });
  if (!ok) {
    fail(ErrorCode::SchemaMismatch, std::string(op) + ": incompatible schemas (" +
                                        std::to_string(r.schema().size()) + " vs " +
                                        std::to_string(s.schema().size()) + " attributes)");
  }
}

}  // namespace

Relation join(const Relation& left, const Relation& right, const std::vector<JoinPair>& on) {
  if (on.empty()) return cartesian(left, right);
  const KeyIndexes k = resolve_pairs(left, right, on);
  Schema schema = concat_schema(left, right);
  const KeyTable table = build_table(right, k.right);
  std::vector<Row> out;
  for (const Row& lrow : left.rows()) {
    auto it = table.find(extract_key(lrow, k.left));
    if (it == table.end()) continue;
    for (std::size_t ri : it->second) {
      Row r = lrow;
      const Row& rrow = right.row(ri);
      r.insert(r.end(), rrow.begin(), rrow.end());
      out.push_back(std::move(r));
    }
  }
  return Relation::unchecked(std::move(schema), std::move(out));
}

Relation cartesian(const Relation& left, const Relation& right) {
  Schema schema = concat_schema(left, right);
  std::vector<Row> out;
  out.reserve(left.size() * right.size());
  for (const Row& lrow : left.rows()) {
    for (const Row& rrow : right.rows()) {
      Row r = lrow;
      r.insert(r.end(), rrow.begin(), rrow.end());
      out.push_back(std::move(r));
    }
  }
  return Relation::unchecked(std::move(schema), std::move(out));
}

std::string_view to_string(AggOp op) {
  switch (op) {
    case AggOp::Sum: return "sum";
    case AggOp::Count: return "count";
    case AggOp::Max: return "max";
    case AggOp::Avg: return "avg";
    case AggOp::VectorSum: return "vector_sum";
    case AggOp::MatrixSum: return "matrix_sum";
  }
  return "?";
}

AggOp sum_op_for(const CellType& t) {
  switch (t.type) {
    case ValueType::Int:
    case ValueType::Real: return AggOp::Sum;
    case ValueType::Vec: return AggOp::VectorSum;
    case ValueType::Mat: return AggOp::MatrixSum;
    case ValueType::Text: break;
  }
  fail(ErrorCode::TypeMismatch, "cannot sum " + to_string(t));
}

namespace {

struct Accumulator {
  std::int64_t count = 0;
  std::int64_t isum = 0;
  double rsum = 0.0;
  DenseVector vsum;
  DenseMatrix msum;
  Value best;
};

CellType agg_type(AggOp op, const CellType& in) {
  switch (op) {
    case AggOp::Count: return CellType::integer();
    case AggOp::Avg:
      if (!in.numeric()) fail(ErrorCode::TypeMismatch, "avg needs a numeric input");
      return CellType::real();
    case AggOp::Sum:
      if (!in.numeric()) {
        fail(ErrorCode::TypeMismatch, "sum needs a numeric input, got " + to_string(in));
      }
      return in;
    case AggOp::Max:
      if (!in.numeric() && in.type != ValueType::Text) {
        fail(ErrorCode::TypeMismatch, "max needs a numeric or text input");
      }
      return in;
    case AggOp::VectorSum:
      if (in.type != ValueType::Vec) fail(ErrorCode::TypeMismatch, "vector sum needs a vector input");
      return in;
    case AggOp::MatrixSum:
      if (in.type != ValueType::Mat) fail(ErrorCode::TypeMismatch, "matrix sum needs a matrix input");
      return in;
  }
  return in;
}

void accumulate(Accumulator& acc, AggOp op, const CellType& in, const Value& v) {
  switch (op) {
    case AggOp::Count:
      break;
    case AggOp::Sum:
    case AggOp::Avg:
      if (in.type == ValueType::Int && op == AggOp::Sum) {
        acc.isum += v.as_int();
      } else {
        acc.rsum += v.as_real();
      }
      break;
    case AggOp::Max:
      if (acc.count == 0 || compare_sql(v, acc.best) > 0) acc.best = v;
      break;
    case AggOp::VectorSum:
      if (acc.count == 0) {
        acc.vsum = v.as_vec();
      } else {
        acc.vsum += v.as_vec();
      }
      break;
    case AggOp::MatrixSum:
      if (acc.count == 0) {
        acc.msum = v.as_mat();
      } else {
        acc.msum += v.as_mat();
      }
      break;
  }
  ++acc.count;
}

Value finish(Accumulator& acc, AggOp op, const CellType& in) {
  switch (op) {
    case AggOp::Count: return Value(acc.count);
    case AggOp::Sum:
      if (in.type == ValueType::Int) return Value(acc.isum);
      return Value(acc.rsum);
    case AggOp::Avg: return Value(acc.rsum / static_cast<double>(acc.count));
    case AggOp::Max: return acc.best;
    case AggOp::VectorSum: return Value(std::move(acc.vsum));
    case AggOp::MatrixSum: return Value(std::move(acc.msum));
  }
  return Value();
}

}  // namespace

Relation group_aggregate(const Relation& rel, const std::vector<std::string>& group_by,
                         const std::vector<AggSpec>& aggs, const EvalContext& ctx) {
  std::vector<std::size_t> gidx;
  std::vector<Attribute> attrs;
  for (const auto& g : group_by) {
    gidx.push_back(rel.schema().index_of(g));
    const Attribute& a = rel.schema()[gidx.back()];
    if (a.type.type == ValueType::Vec || a.type.type == ValueType::Mat) {
      fail(ErrorCode::TypeMismatch, "cannot group by " + a.name + " of type " + to_string(a.type));
    }
    attrs.push_back(a);
  }
  std::vector<std::optional<BoundExpr>> inputs;
  std::vector<CellType> in_types;
  for (const auto& spec : aggs) {
    if (spec.input) {
      inputs.push_back(BoundExpr::bind(*spec.input, rel.schema(), ctx));
      in_types.push_back(inputs.back()->type());
    } else {
      if (spec.op != AggOp::Count) {
        fail(ErrorCode::InvalidArgument, std::string(to_string(spec.op)) + " needs an input");
      }
      inputs.emplace_back();
      in_types.push_back(CellType::integer());
    }
    attrs.push_back({spec.output, agg_type(spec.op, in_types.back())});
  }
  Schema schema(std::move(attrs));

  // Groups keep the first-seen key cells; lookup uses the normalized key.
  std::unordered_map<Row, std::size_t, RowHash> index;
  std::vector<Row> keys;
  std::vector<std::vector<Accumulator>> accs;
  for (const Row& row : rel.rows()) {
    Row k;
    k.reserve(gidx.size());
    for (std::size_t i : gidx) k.push_back(row[i]);
    auto [it, inserted] = index.try_emplace(k, keys.size());
    if (inserted) {
      keys.push_back(std::move(k));
      accs.emplace_back(aggs.size());
    }
    auto& group = accs[it->second];
    for (std::size_t a = 0; a < aggs.size(); ++a) {
      if (inputs[a]) {
        accumulate(group[a], aggs[a].op, in_types[a], inputs[a]->eval(row));
      } else {
        ++group[a].count;
      }
    }
  }
  std::vector<Row> out;
  out.reserve(keys.size());
  for (std::size_t g = 0; g < keys.size(); ++g) {
    Row r = std::move(keys[g]);
    for (std::size_t a = 0; a < aggs.size(); ++a) {
      r.push_back(finish(accs[g][a], aggs[a].op, in_types[a]));
    }
    out.push_back(std::move(r));
  }
  return Relation::unchecked(std::move(schema), std::move(out));
}

Relation union_by_update(const Relation& r, const Relation& s,
                         const std::vector<std::string>& key) {
  if (!(r.schema().size() == s.schema().size() &&
        std::equal(r.schema().begin(), r.schema().end(), s.schema().begin()))) {
    fail(ErrorCode::SchemaMismatch, "union by update: operands must share a schema");
  }
  if (key.empty()) fail(ErrorCode::InvalidUpdateKey, "union by update needs a key");
  std::vector<std::size_t> kidx;
  for (const auto& k : key) {
    kidx.push_back(r.schema().index_of(k));
    const auto t = r.schema()[kidx.back()].type.type;
    if (t == ValueType::Vec || t == ValueType::Mat) {
      fail(ErrorCode::InvalidUpdateKey, "update key " + k + " must be scalar or text");
    }
  }
  check_key_unique(r.rows(), kidx, "union by update left operand");
  check_key_unique(s.rows(), kidx, "union by update right operand");

  std::unordered_map<Row, std::size_t, RowHash> s_index;
  for (std::size_t i = 0; i < s.size(); ++i) s_index.emplace(extract_key(s.row(i), kidx), i);

  std::vector<bool> used(s.size(), false);
  std::vector<Row> out;
  out.reserve(r.size() + s.size());
  for (const Row& row : r.rows()) {
    auto it = s_index.find(extract_key(row, kidx));
    if (it == s_index.end()) {
      out.push_back(row);
    } else {
      out.push_back(s.row(it->second));
      used[it->second] = true;
    }
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!used[i]) out.push_back(s.row(i));
  }
  return Relation::unchecked(r.schema(), std::move(out), key).with_name(r.name());
}

Relation union_all(const Relation& r, const Relation& s) {
  check_union_compatible(r, s, "union all");
  std::vector<Row> out(r.rows().begin(), r.rows().end());
  out.insert(out.end(), s.rows().begin(), s.rows().end());
  return Relation::unchecked(r.schema(), std::move(out));
}

Relation difference(const Relation& r, const Relation& s) {
  check_union_compatible(r, s, "difference");
  std::unordered_set<Row, RowHash> drop(s.rows().begin(), s.rows().end());
  std::vector<Row> out;
  for (const Row& row : r.rows()) {
    if (!drop.contains(row)) out.push_back(row);
  }
  return Relation::unchecked(r.schema(), std::move(out), r.key());
}

Relation semijoin(const Relation& r, const Relation& s, const std::vector<JoinPair>& on) {
  const KeyIndexes k = resolve_pairs(r, s, on);
  const KeyTable table = build_table(s, k.right);
  std::vector<Row> out;
  for (const Row& row : r.rows()) {
    if (table.contains(extract_key(row, k.left))) out.push_back(row);
  }
  return Relation::unchecked(r.schema(), std::move(out), r.key());
}

Relation distinct(const Relation& r) {
  std::unordered_set<Row, RowHash> seen;
  std::vector<Row> out;
  for (const Row& row : r.rows()) {
    if (seen.insert(row).second) out.push_back(row);
  }
  return Relation::unchecked(r.schema(), std::move(out), r.key());
}

namespace {

Value times_op(SemiringTimes t, const Value& a, const Value& b) {
  switch (t) {
    case SemiringTimes::Multiply: return apply_binary(BinaryOp::Mul, a, b);
    case SemiringTimes::Add: return apply_binary(BinaryOp::Add, a, b);
    case SemiringTimes::Min: return Value(std::min(a.as_real(), b.as_real()));
    case SemiringTimes::Max: return Value(std::max(a.as_real(), b.as_real()));
  }
  return Value();
}

Value plus_op(SemiringPlus p, const Value& a, const Value& b) {
  switch (p) {
    case SemiringPlus::Sum: return apply_binary(BinaryOp::Add, a, b);
    case SemiringPlus::Max: return Value(std::max(a.as_real(), b.as_real()));
    case SemiringPlus::Min: return Value(std::min(a.as_real(), b.as_real()));
  }
  return Value();
}

void require_columns(const Relation& r, std::size_t n, std::string_view what) {
  if (r.schema().size() < n) {
    fail(ErrorCode::SchemaMismatch, std::string(what) + " needs at least " + std::to_string(n) +
                                        " attributes, got " + std::to_string(r.schema().size()));
  }
}

// Folds (group key, value) pairs in first-seen group order.
class Folder {
 public:
  explicit Folder(SemiringPlus plus) : plus_(plus) {}

  void add(Row key, Value v) {
    Row norm;
    for (const auto& c : key) norm.push_back(key_cell(c));
    auto [it, inserted] = index_.try_emplace(std::move(norm), keys_.size());
    if (inserted) {
      keys_.push_back(std::move(key));
      vals_.push_back(std::move(v));
    } else {
      vals_[it->second] = plus_op(plus_, vals_[it->second], v);
    }
  }

  Relation finish(std::vector<std::string> names, const CellType& val_type,
                  const std::vector<CellType>& key_types) {
    std::vector<Attribute> attrs;
    for (std::size_t i = 0; i < key_types.size(); ++i) attrs.push_back({names[i], key_types[i]});
    CellType vt = val_type;
    if (!vals_.empty()) vt = vals_.front().cell_type();
    attrs.push_back({names.back(), vt});
    std::vector<Row> out;
    for (std::size_t i = 0; i < keys_.size(); ++i) {
      Row r = keys_[i];
      r.push_back(vals_[i]);
      out.push_back(std::move(r));
    }
    return Relation(Schema(std::move(attrs)), std::move(out));
  }

 private:
  SemiringPlus plus_;
  std::unordered_map<Row, std::size_t, RowHash> index_;
  std::vector<Row> keys_;
  std::vector<Value> vals_;
};

}  // namespace

Relation mv_join(const Relation& e, const Relation& v, SemiringPlus plus, SemiringTimes times) {
  require_columns(e, 3, "matrix relation");
  require_columns(v, 2, "vector relation");
  check_key_types(e.schema()[1].type, v.schema()[0].type, e.schema()[1].name, v.schema()[0].name);
  const KeyTable table = build_table(v, {0});
  Folder folder(plus);
  for (const Row& row : e.rows()) {
    auto it = table.find(Row{key_cell(row[1])});
    if (it == table.end()) continue;
    for (std::size_t vi : it->second) {
      folder.add(Row{row[0]}, times_op(times, row[2], v.row(vi)[1]));
    }
  }
  return folder.finish({"f", "val"}, e.schema()[2].type, {e.schema()[0].type});
}

Relation mm_join(const Relation& e, const Relation& e2, SemiringPlus plus, SemiringTimes times) {
  require_columns(e, 3, "matrix relation");
  require_columns(e2, 3, "matrix relation");
  check_key_types(e.schema()[1].type, e2.schema()[0].type, e.schema()[1].name,
                  e2.schema()[0].name);
  const KeyTable table = build_table(e2, {0});
  Folder folder(plus);
  for (const Row& row : e.rows()) {
    auto it = table.find(Row{key_cell(row[1])});
    if (it == table.end()) continue;
    for (std::size_t ri : it->second) {
      const Row& r2 = e2.row(ri);
      folder.add(Row{row[0], r2[1]}, times_op(times, row[2], r2[2]));
    }
  }
  return folder.finish({"f", "t", "val"}, e.schema()[2].type,
                       {e.schema()[0].type, e2.schema()[1].type});
}

Relation elementwise_join(const Relation& e, const Relation& e2, SemiringPlus plus,
                          SemiringTimes times) {
  require_columns(e, 3, "matrix relation");
  require_columns(e2, 3, "matrix relation");
  check_key_types(e.schema()[0].type, e2.schema()[0].type, e.schema()[0].name,
                  e2.schema()[0].name);
  check_key_types(e.schema()[1].type, e2.schema()[1].type, e.schema()[1].name,
                  e2.schema()[1].name);
  const KeyTable table = build_table(e2, {0, 1});
  Folder folder(plus);
  for (const Row& row : e.rows()) {
    auto it = table.find(Row{key_cell(row[0]), key_cell(row[1])});
    if (it == table.end()) continue;
    for (std::size_t ri : it->second) {
      folder.add(Row{row[0]}, times_op(times, row[2], e2.row(ri)[2]));
    }
  }
  return folder.finish({"f", "val"}, e.schema()[2].type, {e.schema()[0].type});
}

}  // namespace emview
