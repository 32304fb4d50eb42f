#include "emview/sql/lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "emview/error.hpp"

namespace emview::sql {
namespace {

constexpr std::array kKeywords = {
    "all",  "and",    "as",     "by",           "computed", "from", "group",
    "over", "partition", "select", "maxrecursion", "union",    "update", "where",
    "with",
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

}  // namespace

bool is_keyword(std::string_view lower) {
  return std::find(kKeywords.begin(), kKeywords.end(), lower) != kKeywords.end();
}

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  std::size_t line = 1;
  std::size_t col = 1;
  auto advance = [&](std::size_t n = 1) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto error = [&](const std::string& msg) -> void {
    fail(ErrorCode::SyntaxError,
         "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + msg);
  };

  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance();
      continue;
    }
    if (c == '-' && i + 1 < src.size() && src[i + 1] == '-') {
      while (i < src.size() && src[i] != '\n') advance();
      continue;
    }
    Token tok;
    tok.line = line;
    tok.column = col;
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && ident_char(src[j])) ++j;
      std::string word(src.substr(i, j - i));
      std::transform(word.begin(), word.end(), word.begin(),
                     [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
      tok.kind = is_keyword(word) ? TokenKind::Keyword : TokenKind::Identifier;
      tok.text = std::move(word);
      advance(j - i);
    } else if (digit(c) || (c == '.' && i + 1 < src.size() && digit(src[i + 1]))) {
      std::size_t j = i;
      bool real = false;
      while (j < src.size() && digit(src[j])) ++j;
      if (j < src.size() && src[j] == '.') {
        real = true;
        ++j;
        while (j < src.size() && digit(src[j])) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && digit(src[k])) {
          real = true;
          j = k;
          while (j < src.size() && digit(src[j])) ++j;
        }
      }
      if (j < src.size() && ident_start(src[j])) error("malformed number");
      tok.kind = real ? TokenKind::Real : TokenKind::Integer;
      tok.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (c == '\'') {
      std::string text;
      advance();
      bool closed = false;
      while (i < src.size()) {
        if (src[i] == '\'') {
          if (i + 1 < src.size() && src[i + 1] == '\'') {
            text += '\'';
            advance(2);
            continue;
          }
          advance();
          closed = true;
          break;
        }
        text += src[i];
        advance();
      }
      if (!closed) {
        line = tok.line;
        col = tok.column;
        error("unterminated string literal");
      }
      tok.kind = TokenKind::String;
      tok.text = std::move(text);
    } else {
      static constexpr std::array kTwo = {"<=", ">=", "<>", "!="};
      std::string sym(1, c);
      if (i + 1 < src.size()) {
        const std::string two{c, src[i + 1]};
        if (std::find(kTwo.begin(), kTwo.end(), two) != kTwo.end()) sym = two;
      }
      if (sym.size() == 1 && std::string_view("(),.+-*/=<>;").find(c) == std::string_view::npos) {
        error(std::string("unexpected character '") + c + "'");
      }
      tok.kind = TokenKind::Symbol;
      tok.text = sym;
      advance(sym.size());
    }
    out.push_back(std::move(tok));
  }
  Token end;
  end.kind = TokenKind::End;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

}  // namespace emview::sql
