#include "itest/python/lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstring>

namespace itest::py {
namespace {

constexpr std::array<std::string_view, 35> kKeywords = {
    "False",  "None",   "True",    "and",      "as",       "assert", "async",
    "await",  "break",  "class",   "continue", "def",      "del",    "elif",
    "else",   "except", "finally", "for",      "from",     "global", "if",
    "import", "in",     "is",      "lambda",   "nonlocal", "not",    "or",
    "pass",   "raise",  "return",  "try",      "while",    "with",   "yield"};

// Longest operators first so that prefix matching picks the maximal munch.
constexpr std::array<std::string_view, 48> kOperators = {
    "**=", "//=", ">>=", "<<=", "...", "->", ":=", "**", "//", "<<", ">>", "<=",
    ">=",  "==",  "!=",  "+=",  "-=",  "*=", "/=", "%=", "&=", "|=", "^=", "@=",
    "(",   ")",   "[",   "]",   "{",   "}",  ",",  ":",  ".",  ";",  "@",  "=",
    "+",   "-",   "*",   "/",   "%",   "&",  "|",  "^",  "~",  "<",  ">",  "!"};

bool is_ident_start(unsigned char c) {
  return std::isalpha(c) || c == '_' || c >= 0x80;
}

bool is_ident_char(unsigned char c) {
  return std::isalnum(c) || c == '_' || c >= 0x80;
}

class Lexer {
 public:
  Lexer(std::string_view src, LexOptions options)
      : src_(src), line_(options.origin.line), line_start_col_(options.origin.col) {
    if (options.bracketed) depth_.push_back({'(', options.origin});
    bracketed_ = options.bracketed;
  }

  std::vector<Token> run() {
    while (pos_ < src_.size()) {
      if (at_line_start_ && depth_.empty()) {
        if (!handle_indentation()) continue;
      }
      scan_token();
    }
    finish();
    return std::move(tokens_);
  }

  // Records lines that start inside a triple-quoted string.
  std::vector<int> continuation_lines_;

 private:
  struct Bracket {
    char open;
    Pos where;
  };

  Pos here() const {
    int col = static_cast<int>(pos_ - line_begin_);
    if (line_ == first_line_) col += line_start_col_;
    return {line_, col};
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw SyntaxError(message, here());
  }

  [[noreturn]] void fail_at(const std::string& message, Pos where) const {
    throw SyntaxError(message, where);
  }

  void new_line() {
    ++line_;
    line_begin_ = pos_;
  }

  void push(TokenKind kind, std::size_t begin, Pos begin_pos) {
    Token tok{kind, src_.substr(begin, pos_ - begin), begin_pos, here()};
    tokens_.push_back(tok);
  }

  bool last_is_line_content() const {
    if (tokens_.empty()) return false;
    auto k = tokens_.back().kind;
    return k != TokenKind::Newline && k != TokenKind::Indent && k != TokenKind::Dedent;
  }

  // Measures the indentation of a new logical line. Returns false when the
  // line was blank or comment-only and has been consumed.
  bool handle_indentation() {
    int width = 0;
    std::size_t p = pos_;
    while (p < src_.size()) {
      char c = src_[p];
      if (c == ' ') {
        ++width;
      } else if (c == '\t') {
        width = (width / 8 + 1) * 8;
      } else if (c == '\f') {
        width = 0;
      } else {
        break;
      }
      ++p;
    }
    if (p >= src_.size()) {
      pos_ = p;
      return false;
    }
    char c = src_[p];
    if (c == '#' || c == '\n' || c == '\r' || (c == '\\' && p + 1 < src_.size() && src_[p + 1] == '\n')) {
      // Blank, comment-only, or continuation-only line: no indentation change.
      pos_ = p;
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      }
      if (pos_ < src_.size() && src_[pos_] == '\\') ++pos_;
      if (pos_ < src_.size() && src_[pos_] == '\r') ++pos_;
      if (pos_ < src_.size() && src_[pos_] == '\n') {
        ++pos_;
        new_line();
      }
      return false;
    }
    pos_ = p;
    at_line_start_ = false;
    Pos where = here();
    if (width > indents_.back()) {
      indents_.push_back(width);
      tokens_.push_back({TokenKind::Indent, src_.substr(pos_, 0), {where.line, 0}, where});
    } else {
      while (width < indents_.back()) {
        indents_.pop_back();
        tokens_.push_back({TokenKind::Dedent, src_.substr(pos_, 0), where, where});
      }
      if (width != indents_.back()) {
        fail_at("unindent does not match any outer indentation level", where);
      }
    }
    return true;
  }

  void scan_token() {
    char c = src_[pos_];
    if (c == ' ' || c == '\t' || c == '\f') {
      ++pos_;
      return;
    }
    if (c == '#') {
      while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      return;
    }
    if (c == '\\') {
      std::size_t p = pos_ + 1;
      if (p < src_.size() && src_[p] == '\r') ++p;
      if (p < src_.size() && src_[p] == '\n') {
        pos_ = p + 1;
        new_line();
        return;
      }
      if (p >= src_.size()) fail("unexpected EOF while parsing");
      fail("unexpected character after line continuation character");
    }
    if (c == '\r' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '\n') {
      ++pos_;
      return;
    }
    if (c == '\n' || c == '\r') {
      Pos begin = here();
      std::size_t b = pos_;
      ++pos_;
      if (depth_.empty() && last_is_line_content()) {
        tokens_.push_back({TokenKind::Newline, src_.substr(b, 1), begin, {begin.line, begin.col + 1}});
      }
      new_line();
      if (depth_.empty()) at_line_start_ = true;
      return;
    }
    const auto uc = static_cast<unsigned char>(c);
    if (is_ident_start(uc)) {
      scan_name_or_string();
      return;
    }
    if (std::isdigit(uc) || (c == '.' && pos_ + 1 < src_.size() &&
                             std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      scan_number();
      return;
    }
    if (c == '"' || c == '\'') {
      scan_string(pos_, pos_);
      return;
    }
    scan_operator();
  }

  void scan_name_or_string() {
    std::size_t begin = pos_;
    std::size_t p = pos_;
    while (p < src_.size() && is_ident_char(static_cast<unsigned char>(src_[p]))) ++p;
    std::string_view word = src_.substr(begin, p - begin);
    if (p < src_.size() && (src_[p] == '"' || src_[p] == '\'') && word.size() <= 2) {
      std::string lower;
      for (char ch : word) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
      static constexpr std::array<std::string_view, 8> prefixes = {"r",  "u",  "b",  "f",
                                                                    "br", "rb", "fr", "rf"};
      if (std::find(prefixes.begin(), prefixes.end(), std::string_view(lower)) != prefixes.end()) {
        scan_string(begin, p);
        return;
      }
    }
    Pos begin_pos = here();
    pos_ = p;
    push(TokenKind::Name, begin, begin_pos);
  }

  void scan_number() {
    std::size_t begin = pos_;
    Pos begin_pos = here();
    auto digits = [&](auto pred) {
      bool any = false;
      while (pos_ < src_.size()) {
        char ch = src_[pos_];
        if (pred(static_cast<unsigned char>(ch))) {
          any = true;
          ++pos_;
        } else if (ch == '_' && any && pos_ + 1 < src_.size() &&
                   pred(static_cast<unsigned char>(src_[pos_ + 1]))) {
          ++pos_;
        } else {
          break;
        }
      }
      return any;
    };
    auto dec = [](unsigned char ch) { return std::isdigit(ch) != 0; };
    char c = src_[pos_];
    if (c == '0' && pos_ + 1 < src_.size() && std::strchr("xXoObB", src_[pos_ + 1]) != nullptr) {
      char base = static_cast<char>(std::tolower(static_cast<unsigned char>(src_[pos_ + 1])));
      pos_ += 2;
      if (pos_ < src_.size() && src_[pos_] == '_') ++pos_;
      bool ok = false;
      if (base == 'x') ok = digits([](unsigned char ch) { return std::isxdigit(ch) != 0; });
      if (base == 'o') ok = digits([](unsigned char ch) { return ch >= '0' && ch <= '7'; });
      if (base == 'b') ok = digits([](unsigned char ch) { return ch == '0' || ch == '1'; });
      if (!ok) fail("invalid numeric literal");
    } else {
      bool is_float = false;
      if (c != '.') digits(dec);
      std::string_view int_part = src_.substr(begin, pos_ - begin);
      if (pos_ < src_.size() && src_[pos_] == '.') {
        is_float = true;
        ++pos_;
        digits(dec);
      }
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        std::size_t save = pos_;
        ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
        if (!digits(dec)) {
          pos_ = save;
          fail("invalid decimal literal");
        }
        is_float = true;
      }
      if (pos_ < src_.size() && (src_[pos_] == 'j' || src_[pos_] == 'J')) {
        ++pos_;
        is_float = true;
      }
      if (!is_float && int_part.size() > 1 && int_part[0] == '0' &&
          int_part.find_first_not_of("0_") != std::string_view::npos) {
        fail_at("leading zeros in decimal integer literals are not permitted", begin_pos);
      }
    }
    if (pos_ < src_.size() && is_ident_start(static_cast<unsigned char>(src_[pos_]))) {
      fail("invalid decimal literal");
    }
    push(TokenKind::Number, begin, begin_pos);
  }

  // begin: start of the prefix; quote: position of the opening quote.
  void scan_string(std::size_t begin, std::size_t quote) {
    Pos begin_pos = here();
    std::string prefix;
    for (std::size_t i = begin; i < quote; ++i) {
      prefix.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(src_[i]))));
    }
    pos_ = quote;
    char q = src_[pos_];
    bool triple = pos_ + 2 < src_.size() && src_[pos_ + 1] == q && src_[pos_ + 2] == q;
    pos_ += triple ? 3 : 1;
    for (;;) {
      if (pos_ >= src_.size()) {
        fail_at(triple ? "unterminated triple-quoted string literal"
                       : "unterminated string literal",
                begin_pos);
      }
      char c = src_[pos_];
      if (c == '\\') {
        pos_ += 1;
        if (pos_ < src_.size()) {
          if (src_[pos_] == '\r' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '\n') ++pos_;
          if (src_[pos_] == '\n') {
            ++pos_;
            new_line();
            continuation_lines_.push_back(line_);
          } else {
            ++pos_;
          }
        }
        continue;
      }
      if (c == '\n') {
        if (!triple) fail_at("unterminated string literal", begin_pos);
        ++pos_;
        new_line();
        continuation_lines_.push_back(line_);
        continue;
      }
      if (c == q) {
        if (!triple) {
          ++pos_;
          break;
        }
        if (pos_ + 2 < src_.size() && src_[pos_ + 1] == q && src_[pos_ + 2] == q) {
          pos_ += 3;
          break;
        }
      }
      ++pos_;
    }
    Token tok{TokenKind::String, src_.substr(begin, pos_ - begin), begin_pos, here()};
    tok.fstring = prefix.find('f') != std::string::npos;
    tok.bytes = prefix.find('b') != std::string::npos;
    tok.raw = prefix.find('r') != std::string::npos;
    tokens_.push_back(tok);
  }

  void scan_operator() {
    Pos begin_pos = here();
    std::string_view rest = src_.substr(pos_);
    for (std::string_view op : kOperators) {
      if (rest.substr(0, op.size()) != op) continue;
      if (op == "!") fail("invalid syntax");
      std::size_t begin = pos_;
      pos_ += op.size();
      if (op == "(" || op == "[" || op == "{") {
        depth_.push_back({op[0], begin_pos});
      } else if (op == ")" || op == "]" || op == "}") {
        char expected = op == ")" ? '(' : op == "]" ? '[' : '{';
        if (depth_.empty() || (bracketed_ && depth_.size() == 1)) {
          fail_at("unmatched '" + std::string(op) + "'", begin_pos);
        }
        if (depth_.back().open != expected) {
          fail_at("closing parenthesis '" + std::string(op) +
                      "' does not match opening parenthesis '" +
                      std::string(1, depth_.back().open) + "'",
                  begin_pos);
        }
        depth_.pop_back();
      }
      push(TokenKind::Op, begin, begin_pos);
      return;
    }
    fail(std::string("invalid character '") + src_[pos_] + "'");
  }

  void finish() {
    std::size_t open = bracketed_ ? 1 : 0;
    if (depth_.size() > open) {
      const auto& b = depth_.back();
      fail_at("'" + std::string(1, b.open) + "' was never closed", b.where);
    }
    Pos end = here();
    if (!bracketed_ && last_is_line_content()) {
      tokens_.push_back({TokenKind::Newline, src_.substr(src_.size()), end, end});
    }
    while (indents_.size() > 1) {
      indents_.pop_back();
      tokens_.push_back({TokenKind::Dedent, src_.substr(src_.size()), end, end});
    }
    tokens_.push_back({TokenKind::EndMarker, src_.substr(src_.size()), end, end});
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_begin_ = 0;
  int line_;
  int first_line_ = line_;
  int line_start_col_;
  bool at_line_start_ = true;
  bool bracketed_ = false;
  std::vector<int> indents_{0};
  std::vector<Bracket> depth_;
  std::vector<Token> tokens_;
};

}  // namespace

bool is_keyword(std::string_view word) {
  return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

std::vector<Token> tokenize(std::string_view source, LexOptions options) {
  Lexer lexer(source, options);
  return lexer.run();
}

std::vector<int> string_continuation_lines(std::string_view source) {
  Lexer lexer(source, {});
  lexer.run();
  return std::move(lexer.continuation_lines_);
}

}  // namespace itest::py
