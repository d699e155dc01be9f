#include "itest/python/lexer.hpp"

#include <gtest/gtest.h>

using namespace itest::py;

namespace {

std::vector<TokenKind> kinds(std::string_view source, LexOptions options = {}) {
  std::vector<TokenKind> out;
  for (const auto& t : tokenize(source, options)) out.push_back(t.kind);
  return out;
}

std::vector<std::string> texts(std::string_view source) {
  std::vector<std::string> out;
  for (const auto& t : tokenize(source)) {
    if (t.kind == TokenKind::Name || t.kind == TokenKind::Number || t.kind == TokenKind::String ||
        t.kind == TokenKind::Op) {
      out.emplace_back(t.text);
    }
  }
  return out;
}

using K = TokenKind;

}  // namespace

TEST(Lexer, SimpleStatement) {
  EXPECT_EQ(kinds("x = 1\n"), (std::vector<K>{K::Name, K::Op, K::Number, K::Newline, K::EndMarker}));
}

TEST(Lexer, MissingFinalNewlineIsSupplied) {
  EXPECT_EQ(kinds("x"), (std::vector<K>{K::Name, K::Newline, K::EndMarker}));
}

TEST(Lexer, IndentAndDedent) {
  EXPECT_EQ(kinds("if a:\n    b\nc\n"),
            (std::vector<K>{K::Name, K::Name, K::Op, K::Newline, K::Indent, K::Name, K::Newline, K::Dedent,
                            K::Name, K::Newline, K::EndMarker}));
}

TEST(Lexer, BlankAndCommentLinesDoNotAffectIndentation) {
  EXPECT_EQ(kinds("if a:\n\n  # note\n    b\n"),
            (std::vector<K>{K::Name, K::Name, K::Op, K::Newline, K::Indent, K::Name, K::Newline, K::Dedent,
                            K::EndMarker}));
}

TEST(Lexer, NewlinesInsideBracketsAreIgnored) {
  EXPECT_EQ(kinds("f(a,\n  b)\n"),
            (std::vector<K>{K::Name, K::Op, K::Name, K::Op, K::Name, K::Op, K::Newline, K::EndMarker}));
}

TEST(Lexer, BackslashContinuation) {
  EXPECT_EQ(kinds("x = 1 + \\\n    2\n"),
            (std::vector<K>{K::Name, K::Op, K::Number, K::Op, K::Number, K::Newline, K::EndMarker}));
}

TEST(Lexer, OperatorsUseLongestMatch) {
  EXPECT_EQ(texts("a **= b // c -> d := e != f ... g\n"),
            (std::vector<std::string>{"a", "**=", "b", "//", "c", "->", "d", ":=", "e", "!=", "f", "...", "g"}));
}

TEST(Lexer, NumberForms) {
  EXPECT_EQ(texts("0 10 1_000 0x1F 0o17 0b101 1.5 .5 5. 1e10 1.5E-3 3j 0.0\n"),
            (std::vector<std::string>{"0", "10", "1_000", "0x1F", "0o17", "0b101", "1.5", ".5", "5.", "1e10",
                                      "1.5E-3", "3j", "0.0"}));
}

TEST(Lexer, LeadingZeroDecimalIsRejected) {
  EXPECT_THROW(tokenize("x = 012\n"), SyntaxError);
}

TEST(Lexer, StringPrefixesAndFlags) {
  auto toks = tokenize("rb'a' F\"b\" u'c' Rf'''d'''\n");
  ASSERT_GE(toks.size(), 4u);
  EXPECT_TRUE(toks[0].bytes && toks[0].raw && !toks[0].fstring);
  EXPECT_TRUE(toks[1].fstring && !toks[1].raw);
  EXPECT_FALSE(toks[2].fstring || toks[2].bytes || toks[2].raw);
  EXPECT_TRUE(toks[3].fstring && toks[3].raw);
  EXPECT_EQ(toks[3].text, "Rf'''d'''");
}

TEST(Lexer, TripleQuotedStringSpansLines) {
  auto toks = tokenize("s = '''a\nb'''\n");
  EXPECT_EQ(toks[2].kind, K::String);
  EXPECT_EQ(toks[2].begin, (Pos{1, 4}));
  EXPECT_EQ(toks[2].end, (Pos{2, 4}));
}

TEST(Lexer, UnterminatedStringIsRejected) {
  EXPECT_THROW(tokenize("s = 'abc\n"), SyntaxError);
  EXPECT_THROW(tokenize("s = '''abc\n"), SyntaxError);
}

TEST(Lexer, InconsistentDedentIsRejected) {
  EXPECT_THROW(tokenize("if a:\n    b\n  c\n"), SyntaxError);
}

TEST(Lexer, UnmatchedBracketsAreRejected) {
  EXPECT_THROW(tokenize("f(a]\n"), SyntaxError);
  EXPECT_THROW(tokenize("f(a\n"), SyntaxError);
  EXPECT_THROW(tokenize("a)\n"), SyntaxError);
}

TEST(Lexer, ColumnsAreByteOffsets) {
  auto toks = tokenize("s = '\xc3\xa9' + x\n");
  EXPECT_EQ(toks[4].text, "x");
  EXPECT_EQ(toks[4].begin.col, 11);
}

TEST(Lexer, OriginShiftsPositions) {
  LexOptions options;
  options.origin = {5, 8};
  options.bracketed = true;
  auto toks = tokenize("a +\nb", options);
  EXPECT_EQ(toks[0].begin, (Pos{5, 8}));
  EXPECT_EQ(toks[2].begin, (Pos{6, 0}));
  EXPECT_EQ(toks.back().kind, K::EndMarker);
}

TEST(Lexer, StringContinuationLines) {
  EXPECT_EQ(string_continuation_lines("x = '''a\nb\nc'''\ny = 1\n"), (std::vector<int>{2, 3}));
  EXPECT_EQ(string_continuation_lines("x = 'a'\n"), std::vector<int>{});
  EXPECT_EQ(string_continuation_lines("x = 'a\\\nb'\n"), (std::vector<int>{2}));
}

TEST(Lexer, Keywords) {
  EXPECT_TRUE(is_keyword("lambda"));
  EXPECT_TRUE(is_keyword("None"));
  EXPECT_FALSE(is_keyword("match"));
  EXPECT_FALSE(is_keyword("print"));
}
