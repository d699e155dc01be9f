#pragma once

// Locates inline-test statements in a parsed source file.

#include <string>
#include <string_view>
#include <vector>

#include "itest/diagnostics.hpp"
#include "itest/source.hpp"

namespace itest {

inline constexpr std::string_view kConstructorName = "itest";

struct RawInlineTest {
  // The expression statement holding the chain. For an inline test used
  // as a sub-expression, the statement that contains it.
  const py::Stmt* statement = nullptr;
  // The outermost call of the chain.
  const py::Expr* chain = nullptr;
  Location location;
  const py::Block* enclosing_block = nullptr;
  std::size_t index_in_block = 0;
  bool embedded = false;
};

// True for an import that binds the bare name `itest` without an alias.
bool is_marker_import(const py::Stmt& stmt);
bool has_marker_import(const py::Module& module);

// True for a call chain whose innermost callee is the name `itest`.
bool is_inline_test_chain(const py::Expr& expr);

// True for an expression statement consisting of an inline-test chain.
bool is_inline_test_statement(const py::Stmt& stmt);

struct StatementSource {
  std::string text;
  // 1-based lines of `text` that continue a multi-line string literal.
  std::vector<int> string_lines;
};

// Source text of a statement with every inline-test statement nested in it
// replaced by `pass`. Line structure is preserved.
StatementSource statement_source(const py::Stmt& stmt, const SourceFile& source);

// Every inline test in the file, in source order. Empty when the file does
// not import the constructor.
std::vector<RawInlineTest> find_inline_tests(const SourceFile& source);

}  // namespace itest
