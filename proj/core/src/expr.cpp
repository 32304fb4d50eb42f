#include "emview/expr.hpp"

#include <cmath>

#include "emview/error.hpp"

namespace emview {

std::string_view to_string(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Eq: return "=";
    case BinaryOp::Ne: return "<>";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::And: return "and";
  }
  return "?";
}

bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return *a == *b;
}

namespace {

bool list_equal(const std::vector<ExprPtr>& a, const std::vector<ExprPtr>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!expr_equal(a[i], b[i])) return false;
  return true;
}

ExprPtr make(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

}  // namespace

bool operator==(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Expr::Kind::Literal: return a.literal == b.literal;
    case Expr::Kind::Column: return a.name == b.name;
    case Expr::Kind::Negate: return list_equal(a.args, b.args);
    case Expr::Kind::Binary: return a.op == b.op && list_equal(a.args, b.args);
    case Expr::Kind::Call: return a.name == b.name && list_equal(a.args, b.args);
    case Expr::Kind::Aggregate:
      return a.name == b.name && a.star_arg == b.star_arg && list_equal(a.args, b.args);
    case Expr::Kind::Window:
      return list_equal(a.args, b.args) && list_equal(a.partition_by, b.partition_by);
    case Expr::Kind::Star: return true;
  }
  return false;
}

ExprPtr lit(Value v) {
  Expr e;
  e.kind = Expr::Kind::Literal;
  e.literal = std::move(v);
  return make(std::move(e));
}

ExprPtr col(std::string name) {
  Expr e;
  e.kind = Expr::Kind::Column;
  e.name = std::move(name);
  return make(std::move(e));
}

ExprPtr neg(ExprPtr x) {
  Expr e;
  e.kind = Expr::Kind::Negate;
  e.args = {std::move(x)};
  return make(std::move(e));
}

ExprPtr binary(BinaryOp op, ExprPtr a, ExprPtr b) {
  Expr e;
  e.kind = Expr::Kind::Binary;
  e.op = op;
  e.args = {std::move(a), std::move(b)};
  return make(std::move(e));
}

ExprPtr call(std::string name, std::vector<ExprPtr> args) {
  Expr e;
  e.kind = Expr::Kind::Call;
  e.name = std::move(name);
  e.args = std::move(args);
  return make(std::move(e));
}

ExprPtr aggregate(std::string name, ExprPtr arg) {
  Expr e;
  e.kind = Expr::Kind::Aggregate;
  e.name = std::move(name);
  e.args = {std::move(arg)};
  return make(std::move(e));
}

ExprPtr count_star() {
  Expr e;
  e.kind = Expr::Kind::Aggregate;
  e.name = "count";
  e.star_arg = true;
  return make(std::move(e));
}

ExprPtr window(ExprPtr aggregate_call, std::vector<ExprPtr> partition_by) {
  Expr e;
  e.kind = Expr::Kind::Window;
  e.args = {std::move(aggregate_call)};
  e.partition_by = std::move(partition_by);
  return make(std::move(e));
}

ExprPtr star() {
  Expr e;
  e.kind = Expr::Kind::Star;
  return make(std::move(e));
}

std::string to_sql(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Literal:
      if (e.literal.is_text()) {
        std::string s = "'";
        for (char c : e.literal.as_text()) {
          if (c == '\'') s += '\'';
          s += c;
        }
        return s + "'";
      }
      return format_value(e.literal);
    case Expr::Kind::Column: return e.name;
    case Expr::Kind::Negate: return "(-" + to_sql(*e.args[0]) + ")";
    case Expr::Kind::Binary:
      return "(" + to_sql(*e.args[0]) + " " + std::string(to_string(e.op)) + " " +
             to_sql(*e.args[1]) + ")";
    case Expr::Kind::Call: {
      std::string s = e.name + "(";
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) s += ", ";
        s += to_sql(*e.args[i]);
      }
      return s + ")";
    }
    case Expr::Kind::Aggregate:
      if (e.star_arg) return e.name + "(*)";
      return e.name + "(" + to_sql(*e.args[0]) + ")";
    case Expr::Kind::Window: {
      std::string s = to_sql(*e.args[0]) + " over (partition by ";
      for (std::size_t i = 0; i < e.partition_by.size(); ++i) {
        if (i) s += ", ";
        s += to_sql(*e.partition_by[i]);
      }
      return s + ")";
    }
    case Expr::Kind::Star: return "*";
  }
  return {};
}

bool contains_aggregate(const Expr& e) {
  if (e.kind == Expr::Kind::Aggregate) return true;
  if (e.kind == Expr::Kind::Window) return false;
  for (const auto& a : e.args)
    if (contains_aggregate(*a)) return true;
  return false;
}

bool contains_window(const Expr& e) {
  if (e.kind == Expr::Kind::Window) return true;
  for (const auto& a : e.args)
    if (contains_window(*a)) return true;
  return false;
}

void FunctionRegistry::add(FunctionDef def) {
  std::string name = def.name;
  defs_.insert_or_assign(std::move(name), std::move(def));
}

const FunctionDef* FunctionRegistry::find(std::string_view name) const {
  auto it = defs_.find(name);
  return it == defs_.end() ? nullptr : &it->second;
}

std::vector<std::string> FunctionRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : defs_) out.push_back(name);
  return out;
}

// ---------------------------------------------------------------------------
// Arithmetic

namespace {

[[noreturn]] void type_error(BinaryOp op, const CellType& a, const CellType& b) {
  fail(ErrorCode::TypeMismatch, "operator '" + std::string(to_string(op)) + "' not defined for " +
                                    to_string(a) + " and " + to_string(b));
}

[[noreturn]] void dim_error(BinaryOp op, const CellType& a, const CellType& b) {
  fail(ErrorCode::DimensionMismatch, "operator '" + std::string(to_string(op)) +
                                         "': incompatible shapes " + to_string(a) + " and " +
                                         to_string(b));
}

bool is_comparison(BinaryOp op) {
  return op == BinaryOp::Eq || op == BinaryOp::Ne || op == BinaryOp::Lt || op == BinaryOp::Le ||
         op == BinaryOp::Gt || op == BinaryOp::Ge;
}

double checked(double r, BinaryOp op) {
  if (!std::isfinite(r)) {
    fail(ErrorCode::NonFinite, op == BinaryOp::Div ? "division produced a non-finite value"
                                                   : "arithmetic produced a non-finite value");
  }
  return r;
}

}  // namespace

CellType binary_result_type(BinaryOp op, const CellType& a, const CellType& b) {
  using VT = ValueType;
  if (is_comparison(op)) {
    if ((a.numeric() && b.numeric()) || (a.type == VT::Text && b.type == VT::Text)) {
      return CellType::integer();
    }
    type_error(op, a, b);
  }
  if (op == BinaryOp::And) {
    if (a.numeric() && b.numeric()) return CellType::integer();
    type_error(op, a, b);
  }
  if (a.numeric() && b.numeric()) {
    if (op != BinaryOp::Div && a.type == VT::Int && b.type == VT::Int) return CellType::integer();
    return CellType::real();
  }
  switch (op) {
    case BinaryOp::Add:
    case BinaryOp::Sub:
      if (a.type != b.type || (a.type != VT::Vec && a.type != VT::Mat)) type_error(op, a, b);
      if (a.rows != b.rows || a.cols != b.cols) dim_error(op, a, b);
      return a;
    case BinaryOp::Mul:
      if (a.numeric() && (b.type == VT::Vec || b.type == VT::Mat)) return b;
      if (b.numeric() && (a.type == VT::Vec || a.type == VT::Mat)) return a;
      if (a.type == VT::Mat && b.type == VT::Vec) {
        if (a.cols != b.rows) dim_error(op, a, b);
        return CellType::vector(a.rows);
      }
      if (a.type == VT::Mat && b.type == VT::Mat) {
        if (a.cols != b.rows) dim_error(op, a, b);
        return CellType::matrix(a.rows, b.cols);
      }
      type_error(op, a, b);
    case BinaryOp::Div:
      if (b.numeric() && (a.type == VT::Vec || a.type == VT::Mat)) return a;
      type_error(op, a, b);
    default: type_error(op, a, b);
  }
}

Value apply_binary(BinaryOp op, const Value& a, const Value& b) {
  if (is_comparison(op)) {
    const int c = compare_sql(a, b);
    bool r = false;
    switch (op) {
      case BinaryOp::Eq: r = c == 0; break;
      case BinaryOp::Ne: r = c != 0; break;
      case BinaryOp::Lt: r = c < 0; break;
      case BinaryOp::Le: r = c <= 0; break;
      case BinaryOp::Gt: r = c > 0; break;
      case BinaryOp::Ge: r = c >= 0; break;
      default: break;
    }
    return Value(std::int64_t{r ? 1 : 0});
  }
  if (op == BinaryOp::And) {
    if (!a.is_numeric() || !b.is_numeric()) type_error(op, a.cell_type(), b.cell_type());
    return Value(std::int64_t{(a.as_real() != 0.0 && b.as_real() != 0.0) ? 1 : 0});
  }
  if (a.is_numeric() && b.is_numeric()) {
    if (op != BinaryOp::Div && a.is_int() && b.is_int()) {
      const auto x = a.as_int(), y = b.as_int();
      switch (op) {
        case BinaryOp::Add: return Value(x + y);
        case BinaryOp::Sub: return Value(x - y);
        case BinaryOp::Mul: return Value(x * y);
        default: break;
      }
    }
    const double x = a.as_real(), y = b.as_real();
    switch (op) {
      case BinaryOp::Add: return Value(checked(x + y, op));
      case BinaryOp::Sub: return Value(checked(x - y, op));
      case BinaryOp::Mul: return Value(checked(x * y, op));
      case BinaryOp::Div: return Value(checked(x / y, op));
      default: break;
    }
  }
  // Shape checks and non-finite detection happen in the linalg helpers and
  // the Value constructors.
  const CellType result = binary_result_type(op, a.cell_type(), b.cell_type());
  (void)result;
  switch (op) {
    case BinaryOp::Add:
      if (a.is_vec()) return Value(add(a.as_vec(), b.as_vec()));
      return Value(mat_add(a.as_mat(), b.as_mat()));
    case BinaryOp::Sub:
      if (a.is_vec()) return Value(sub(a.as_vec(), b.as_vec()));
      return Value(mat_sub(a.as_mat(), b.as_mat()));
    case BinaryOp::Mul:
      if (a.is_numeric()) {
        return b.is_vec() ? Value(scale(a.as_real(), b.as_vec())) : Value(scale(a.as_real(), b.as_mat()));
      }
      if (b.is_numeric()) {
        return a.is_vec() ? Value(scale(b.as_real(), a.as_vec())) : Value(scale(b.as_real(), a.as_mat()));
      }
      if (b.is_vec()) return Value(matvec(a.as_mat(), b.as_vec()));
      return Value(matmul(a.as_mat(), b.as_mat()));
    case BinaryOp::Div: {
      const double d = b.as_real();
      if (d == 0.0) fail(ErrorCode::NonFinite, "division by zero");
      return a.is_vec() ? Value(scale(1.0 / d, a.as_vec())) : Value(scale(1.0 / d, a.as_mat()));
    }
    default: break;
  }
  type_error(op, a.cell_type(), b.cell_type());
}

// ---------------------------------------------------------------------------
// Binding

struct BoundExpr::Node {
  enum class Kind { Const, Column, Negate, Binary, Call } kind = Kind::Const;
  CellType type;
  Value constant;
  std::size_t column = 0;
  BinaryOp op = BinaryOp::Add;
  const FunctionDef* fn = nullptr;
  std::vector<std::shared_ptr<const Node>> kids;
};

namespace {

using Node = BoundExpr::Node;

std::shared_ptr<const Node> bind_node(const Expr& e, const Schema& schema, const EvalContext& ctx) {
  auto n = std::make_shared<Node>();
  switch (e.kind) {
    case Expr::Kind::Literal:
      n->kind = Node::Kind::Const;
      n->constant = e.literal;
      n->type = e.literal.cell_type();
      return n;
    case Expr::Kind::Column: {
      if (auto idx = schema.find(e.name)) {
        n->kind = Node::Kind::Column;
        n->column = *idx;
        n->type = schema[*idx].type;
        return n;
      }
      if (ctx.params) {
        if (auto it = ctx.params->find(e.name); it != ctx.params->end()) {
          n->kind = Node::Kind::Const;
          n->constant = it->second;
          n->type = it->second.cell_type();
          return n;
        }
      }
      schema.index_of(e.name);  // throws UnknownAttribute with context
      return n;
    }
    case Expr::Kind::Negate: {
      n->kind = Node::Kind::Negate;
      n->kids.push_back(bind_node(*e.args[0], schema, ctx));
      const CellType& t = n->kids[0]->type;
      if (t.type == ValueType::Text) fail(ErrorCode::TypeMismatch, "cannot negate text");
      n->type = t;
      return n;
    }
    case Expr::Kind::Binary: {
      n->kind = Node::Kind::Binary;
      n->op = e.op;
      n->kids.push_back(bind_node(*e.args[0], schema, ctx));
      n->kids.push_back(bind_node(*e.args[1], schema, ctx));
      n->type = binary_result_type(e.op, n->kids[0]->type, n->kids[1]->type);
      return n;
    }
    case Expr::Kind::Call: {
      const FunctionDef* fn = ctx.functions ? ctx.functions->find(e.name) : nullptr;
      if (!fn) fail(ErrorCode::UnknownFunction, "unknown function '" + e.name + "'");
      if (e.args.size() < fn->min_args || e.args.size() > fn->max_args) {
        fail(ErrorCode::ArityMismatch, "function '" + e.name + "' takes " +
                                           std::to_string(fn->min_args) +
                                           (fn->max_args != fn->min_args
                                                ? ".." + std::to_string(fn->max_args)
                                                : std::string()) +
                                           " arguments, got " + std::to_string(e.args.size()));
      }
      n->kind = Node::Kind::Call;
      n->fn = fn;
      std::vector<CellType> arg_types;
      for (const auto& a : e.args) {
        n->kids.push_back(bind_node(*a, schema, ctx));
        arg_types.push_back(n->kids.back()->type);
      }
      n->type = fn->infer(arg_types);
      return n;
    }
    case Expr::Kind::Aggregate:
      fail(ErrorCode::InvalidArgument,
           "aggregate '" + e.name + "' is not allowed in a row expression");
    case Expr::Kind::Window:
      fail(ErrorCode::InvalidArgument, "window function is not allowed in a row expression");
    case Expr::Kind::Star:
      fail(ErrorCode::InvalidArgument, "'*' is not allowed in a row expression");
  }
  return n;
}

Value eval_node(const Node& n, const Row& row) {
  switch (n.kind) {
    case Node::Kind::Const: return n.constant;
    case Node::Kind::Column: return row[n.column];
    case Node::Kind::Negate: {
      Value v = eval_node(*n.kids[0], row);
      if (v.is_int()) return Value(-v.as_int());
      if (v.is_real()) return Value(-v.as_real());
      if (v.is_vec()) return Value(scale(-1.0, v.as_vec()));
      return Value(scale(-1.0, v.as_mat()));
    }
    case Node::Kind::Binary: {
      Value a = eval_node(*n.kids[0], row);
      Value b = eval_node(*n.kids[1], row);
      return apply_binary(n.op, a, b);
    }
    case Node::Kind::Call: {
      std::vector<Value> args;
      args.reserve(n.kids.size());
      for (const auto& k : n.kids) args.push_back(eval_node(*k, row));
      return n.fn->eval(args);
    }
  }
  return {};
}

}  // namespace

BoundExpr BoundExpr::bind(const Expr& e, const Schema& schema, const EvalContext& ctx) {
  BoundExpr b;
  b.root_ = bind_node(e, schema, ctx);
  return b;
}

const CellType& BoundExpr::type() const noexcept { return root_->type; }

Value BoundExpr::eval(const Row& row) const { return eval_node(*root_, row); }

bool BoundExpr::test(const Row& row) const {
  const Value v = eval(row);
  if (!v.is_numeric()) fail(ErrorCode::TypeMismatch, "predicate did not evaluate to a boolean");
  return v.as_real() != 0.0;
}

}  // namespace emview
