#include "emview/sql/parser.hpp"

#include <charconv>
#include <cmath>

#include "emview/error.hpp"
#include "emview/sql/lexer.hpp"

namespace emview::sql {
namespace {

bool is_aggregate_name(std::string_view n) { return n == "sum" || n == "count" || n == "avg"; }

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(tokenize(src)) {}

  QueryAst statement() {
    QueryAst q;
    if (peek_keyword("with")) {
      q = with_statement();
    } else if (peek_keyword("select")) {
      q.final_query = select();
    } else {
      error("expected WITH or SELECT");
    }
    accept_symbol(";");
    if (peek().kind != TokenKind::End) error("unexpected '" + peek().text + "' after statement");
    return q;
  }

  ExprPtr standalone_expression() {
    ExprPtr e = expression();
    if (peek().kind != TokenKind::End) error("unexpected '" + peek().text + "' after expression");
    return e;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;

  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& next() {
    const Token& t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }

  [[noreturn]] void error(const std::string& msg, const Token* at = nullptr) const {
    const Token& t = at ? *at : peek();
    fail(ErrorCode::SyntaxError, "line " + std::to_string(t.line) + ", column " +
                                     std::to_string(t.column) + ": " + msg);
  }

  bool peek_keyword(std::string_view kw, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == TokenKind::Keyword && t.text == kw;
  }
  bool peek_symbol(std::string_view s, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == TokenKind::Symbol && t.text == s;
  }
  bool accept_keyword(std::string_view kw) {
    if (!peek_keyword(kw)) return false;
    next();
    return true;
  }
  bool accept_symbol(std::string_view s) {
    if (!peek_symbol(s)) return false;
    next();
    return true;
  }
  void expect_keyword(std::string_view kw) {
    if (!accept_keyword(kw)) error("expected " + std::string(kw) + ", got " + describe(peek()));
  }
  void expect_symbol(std::string_view s) {
    if (!accept_symbol(s)) error("expected '" + std::string(s) + "', got " + describe(peek()));
  }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case TokenKind::End: return "end of input";
      case TokenKind::String: return "string '" + t.text + "'";
      default: return "'" + t.text + "'";
    }
  }

  std::string identifier(std::string_view what) {
    const Token& t = peek();
    if (t.kind == TokenKind::Keyword) {
      fail(ErrorCode::ReservedWord, "line " + std::to_string(t.line) + ", column " +
                                        std::to_string(t.column) + ": '" + t.text +
                                        "' is a reserved word and cannot be used as " +
                                        std::string(what));
    }
    if (t.kind != TokenKind::Identifier) error("expected " + std::string(what) + ", got " + describe(t));
    return next().text;
  }

  std::vector<std::string> identifier_list(std::string_view what) {
    std::vector<std::string> out{identifier(what)};
    while (accept_symbol(",")) out.push_back(identifier(what));
    return out;
  }

  QueryAst with_statement() {
    expect_keyword("with");
    QueryAst q;
    q.recursive_name = identifier("a relation name");
    expect_symbol("(");
    q.columns = identifier_list("a column name");
    expect_symbol(")");
    expect_keyword("as");
    expect_symbol("(");
    q.branches.push_back(branch());
    while (peek_keyword("union")) {
      next();
      UnionOp op;
      if (accept_keyword("all")) {
        op.mode = UnionMode::UnionAll;
      } else if (accept_keyword("by")) {
        expect_keyword("update");
        op.mode = UnionMode::UnionByUpdate;
        if (peek().kind == TokenKind::Identifier) op.key = identifier_list("an update key attribute");
      } else {
        error("expected ALL or BY UPDATE after UNION");
      }
      q.unions.push_back(std::move(op));
      q.branches.push_back(branch());
    }
    if (accept_keyword("maxrecursion")) {
      const Token& t = peek();
      if (t.kind != TokenKind::Integer) error("MAXRECURSION needs a positive integer");
      const std::int64_t n = integer(next());
      if (n <= 0) error("MAXRECURSION needs a positive integer", &t);
      q.max_recursion = n;
    }
    expect_symbol(")");
    if (peek_keyword("select")) q.final_query = select();
    return q;
  }

  Branch branch() {
    Branch b;
    if (peek_symbol("(") && peek_keyword("select", 1)) {
      next();
      branch_body(b);
      expect_symbol(")");
    } else {
      branch_body(b);
    }
    return b;
  }

  void branch_body(Branch& b) {
    b.query = select();
    if (!accept_keyword("computed")) return;
    expect_keyword("by");
    do {
      b.computed_by.push_back(computed_block());
    } while (peek_symbol("(", 1) &&
             (peek().kind == TokenKind::Identifier || peek().kind == TokenKind::Keyword));
  }

  ComputedBy computed_block() {
    ComputedBy c;
    c.name = identifier("a computed-by relation name");
    expect_symbol("(");
    c.columns = identifier_list("a column name");
    expect_symbol(")");
    expect_keyword("as");
    if (accept_symbol("(")) {
      c.query = select();
      expect_symbol(")");
    } else {
      c.query = select();
    }
    return c;
  }

  SelectAst select() {
    expect_keyword("select");
    SelectAst s;
    do {
      SelectItem item;
      if (accept_symbol("*")) {
        item.expr = star();
      } else {
        item.expr = expression();
        if (accept_keyword("as")) item.alias = identifier("a column alias");
      }
      s.projections.push_back(std::move(item));
    } while (accept_symbol(","));
    if (accept_keyword("from")) {
      do {
        s.from.push_back(from_item());
      } while (accept_symbol(","));
    }
    if (accept_keyword("where")) s.where = expression();
    if (accept_keyword("group")) {
      expect_keyword("by");
      do {
        s.group_by.push_back(expression());
      } while (accept_symbol(","));
    }
    return s;
  }

  FromItem from_item() {
    FromItem f;
    if (accept_symbol("(")) {
      f.subquery = std::make_shared<const SelectAst>(select());
      expect_symbol(")");
      if (!peek_keyword("as")) error("a subquery in FROM needs an alias (AS name)");
      next();
      f.alias = identifier("a subquery alias");
      return f;
    }
    f.table = identifier("a relation name");
    if (accept_keyword("as")) f.alias = identifier("a relation alias");
    return f;
  }

  ExprPtr expression() { return conjunction(); }

  ExprPtr conjunction() {
    ExprPtr e = comparison();
    while (accept_keyword("and")) e = binary(BinaryOp::And, e, comparison());
    return e;
  }

  ExprPtr comparison() {
    ExprPtr e = additive();
    static const std::pair<std::string_view, BinaryOp> kOps[] = {
        {"=", BinaryOp::Eq},  {"<>", BinaryOp::Ne}, {"!=", BinaryOp::Ne}, {"<", BinaryOp::Lt},
        {"<=", BinaryOp::Le}, {">", BinaryOp::Gt},  {">=", BinaryOp::Ge},
    };
    for (const auto& [sym, op] : kOps) {
      if (accept_symbol(sym)) return binary(op, e, additive());
    }
    return e;
  }

  ExprPtr additive() {
    ExprPtr e = multiplicative();
    while (true) {
      if (accept_symbol("+")) {
        e = binary(BinaryOp::Add, e, multiplicative());
      } else if (accept_symbol("-")) {
        e = binary(BinaryOp::Sub, e, multiplicative());
      } else {
        return e;
      }
    }
  }

  ExprPtr multiplicative() {
    ExprPtr e = unary();
    while (true) {
      if (accept_symbol("*")) {
        e = binary(BinaryOp::Mul, e, unary());
      } else if (accept_symbol("/")) {
        e = binary(BinaryOp::Div, e, unary());
      } else {
        return e;
      }
    }
  }

  ExprPtr unary() {
    if (accept_symbol("-")) {
      ExprPtr inner = unary();
      // Negative numeric literals fold so that printed literals read back identically.
      if (inner->kind == Expr::Kind::Literal && inner->literal.is_int()) {
        return lit(Value(-inner->literal.as_int()));
      }
      if (inner->kind == Expr::Kind::Literal && inner->literal.is_real()) {
        return lit(Value(-inner->literal.as_real()));
      }
      return neg(inner);
    }
    return primary();
  }

  std::int64_t integer(const Token& t) const {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc() || p != t.text.data() + t.text.size()) error("integer out of range", &t);
    return v;
  }

  ExprPtr primary() {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::Integer:
        next();
        return lit(Value(integer(t)));
      case TokenKind::Real: {
        next();
        double v = 0;
        auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc() || !std::isfinite(v)) error("real literal out of range", &t);
        return lit(Value(v));
      }
      case TokenKind::String:
        next();
        return lit(Value(t.text));
      case TokenKind::Symbol:
        if (accept_symbol("(")) {
          ExprPtr e = expression();
          expect_symbol(")");
          return e;
        }
        error("expected an expression, got " + describe(t));
      case TokenKind::Keyword:
      case TokenKind::Identifier:
        break;
      case TokenKind::End:
        error("expected an expression, got end of input");
    }
    const Token start = t;
    std::string name = identifier("an identifier");
    if (accept_symbol("(")) return call_or_aggregate(std::move(name), start);
    if (accept_symbol(".")) name += "." + identifier("a column name");
    return col(std::move(name));
  }

  ExprPtr call_or_aggregate(std::string name, const Token& start) {
    std::vector<ExprPtr> args;
    bool star_arg = false;
    if (accept_symbol("*")) {
      star_arg = true;
    } else if (!peek_symbol(")")) {
      do {
        args.push_back(expression());
      } while (accept_symbol(","));
    }
    expect_symbol(")");
    ExprPtr e;
    if (star_arg) {
      if (name != "count") error("only count accepts *", &start);
      e = count_star();
    } else if (is_aggregate_name(name) || (name == "max" && args.size() == 1)) {
      if (args.size() != 1) {
        fail(ErrorCode::ArityMismatch, "line " + std::to_string(start.line) + ", column " +
                                           std::to_string(start.column) + ": aggregate " + name +
                                           " takes one argument");
      }
      e = aggregate(name, args.front());
    } else {
      e = call(name, std::move(args));
    }
    if (accept_keyword("over")) {
      if (e->kind != Expr::Kind::Aggregate) error("OVER needs an aggregate function", &start);
      expect_symbol("(");
      expect_keyword("partition");
      expect_keyword("by");
      std::vector<ExprPtr> partition;
      do {
        partition.push_back(expression());
      } while (accept_symbol(","));
      expect_symbol(")");
      e = window(e, std::move(partition));
    }
    return e;
  }
};

}  // namespace

QueryAst parse(std::string_view source) { return Parser(source).statement(); }

ExprPtr parse_expression(std::string_view source) {
  return Parser(source).standalone_expression();
}

}  // namespace emview::sql
