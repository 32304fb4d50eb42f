#pragma once

#include <string_view>

#include "emview/sql/ast.hpp"

namespace emview::sql {

/// Parses one statement: an enhanced recursive WITH or a plain SELECT.
/// Throws SyntaxError (with line/column) or ReservedWord.
QueryAst parse(std::string_view source);

/// Parses a standalone row expression.
ExprPtr parse_expression(std::string_view source);

/// Canonical dialect text; parse(pretty_print(q)) == q.
std::string pretty_print(const QueryAst& q);
std::string pretty_print(const SelectAst& s);

}  // namespace emview::sql
