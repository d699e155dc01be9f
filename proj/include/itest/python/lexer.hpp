#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "itest/python/ast.hpp"

namespace itest::py {

enum class TokenKind {
  Name,
  Number,
  String,
  Op,
  Newline,
  Indent,
  Dedent,
  EndMarker,
};

struct Token {
  TokenKind kind;
  std::string_view text;
  Pos begin;
  Pos end;
  // String tokens: whether the prefix contains `f`, `b`, and `r`.
  bool fstring = false;
  bool bytes = false;
  bool raw = false;

  bool is(TokenKind k, std::string_view t) const { return kind == k && text == t; }
  bool is_op(std::string_view t) const { return is(TokenKind::Op, t); }
  bool is_name(std::string_view t) const { return is(TokenKind::Name, t); }
};

struct LexOptions {
  // Position of the first byte of the input within the enclosing file.
  Pos origin{1, 0};
  // Treat the input as if it were already inside brackets: newlines and
  // indentation are insignificant. Used for standalone expressions.
  bool bracketed = false;
};

// Splits Python source into tokens. Throws SyntaxError on malformed input
// (unterminated strings, bad dedents, unmatched brackets, stray characters).
std::vector<Token> tokenize(std::string_view source, LexOptions options = {});

// Lines (1-based, relative to the input) that begin inside a multi-line
// string literal. Re-indenting those lines would change the string value.
std::vector<int> string_continuation_lines(std::string_view source);

bool is_keyword(std::string_view word);

}  // namespace itest::py
