#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace emview::sql {

enum class TokenKind { Identifier, Keyword, Integer, Real, String, Symbol, End };

struct Token {
  TokenKind kind = TokenKind::End;
  /// Lower-cased for identifiers and keywords; unescaped for strings.
  std::string text;
  std::size_t line = 1;
  std::size_t column = 1;
};

/// Splits dialect source into tokens. Keywords and identifiers are
/// case-insensitive and come back lower-cased; "--" starts a line comment.
/// Throws SyntaxError with line and column on an unexpected character.
std::vector<Token> tokenize(std::string_view source);

bool is_keyword(std::string_view lower);

}  // namespace emview::sql
