#pragma once

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "emview/relation.hpp"

namespace emview {

enum class BinaryOp { Add, Sub, Mul, Div, Eq, Ne, Lt, Le, Gt, Ge, And };

std::string_view to_string(BinaryOp op);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Row expression tree. Column, literal, arithmetic, comparison and call nodes
/// evaluate per row; Aggregate, Window and Star nodes only appear in parsed SQL
/// and are rewritten away by plan lowering before evaluation.
struct Expr {
  enum class Kind { Literal, Column, Negate, Binary, Call, Aggregate, Window, Star };

  Kind kind = Kind::Literal;
  Value literal;
  /// Column name, function name, or aggregate name (lower case).
  std::string name;
  BinaryOp op = BinaryOp::Add;
  std::vector<ExprPtr> args;
  /// Window partition attributes.
  std::vector<ExprPtr> partition_by;
  /// count(*)
  bool star_arg = false;
};

bool operator==(const Expr& a, const Expr& b);
bool expr_equal(const ExprPtr& a, const ExprPtr& b);

ExprPtr lit(Value v);
ExprPtr col(std::string name);
ExprPtr neg(ExprPtr e);
ExprPtr binary(BinaryOp op, ExprPtr a, ExprPtr b);
ExprPtr call(std::string name, std::vector<ExprPtr> args);
ExprPtr aggregate(std::string name, ExprPtr arg);
ExprPtr count_star();
ExprPtr window(ExprPtr aggregate_call, std::vector<ExprPtr> partition_by);
ExprPtr star();

/// SQL text for an expression; binary operators are fully parenthesized.
std::string to_sql(const Expr& e);

bool contains_aggregate(const Expr& e);
bool contains_window(const Expr& e);

/// A scalar function callable from expressions.
struct FunctionDef {
  std::string name;
  std::size_t min_args = 0;
  std::size_t max_args = 0;
  /// Result type for the given argument types; throws TypeMismatch/DimensionMismatch.
  std::function<CellType(std::span<const CellType>)> infer;
  std::function<Value(std::span<const Value>)> eval;
};

class FunctionRegistry {
 public:
  void add(FunctionDef def);
  const FunctionDef* find(std::string_view name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, FunctionDef, std::less<>> defs_;
};

/// Kernel functions registered under their dialect names.
const FunctionRegistry& builtin_functions();

using ParamMap = std::map<std::string, Value, std::less<>>;

/// Name resolution context for binding: function table plus named scalar
/// parameters, consulted when a bare identifier is not an attribute.
struct EvalContext {
  const FunctionRegistry* functions = &builtin_functions();
  const ParamMap* params = nullptr;
};

/// Expression compiled against a schema: attributes resolved to indexes,
/// functions to definitions, result type known.
class BoundExpr {
 public:
  static BoundExpr bind(const Expr& e, const Schema& schema, const EvalContext& ctx = {});

  const CellType& type() const noexcept;
  Value eval(const Row& row) const;
  /// Boolean view of a numeric result (nonzero is true).
  bool test(const Row& row) const;

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
};

/// Value-level arithmetic shared by expressions and aggregation.
Value apply_binary(BinaryOp op, const Value& a, const Value& b);
CellType binary_result_type(BinaryOp op, const CellType& a, const CellType& b);

}  // namespace emview
