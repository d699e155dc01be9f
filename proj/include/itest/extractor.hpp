#pragma once

// Turns raw inline-test statements into validated declarations bound to
// their target statements.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "itest/diagnostics.hpp"
#include "itest/finder.hpp"
#include "itest/source.hpp"

namespace itest {

enum class CheckKind { Eq, Neq, True, False, None, NotNone, Same, NotSame };

// Method name without the `check_` prefix: "eq", "not_none", ...
std::string_view to_string(CheckKind kind);
std::optional<CheckKind> check_kind_from_method(std::string_view method);
bool is_binary(CheckKind kind);

// An expression captured as source text. `elements` holds the element
// texts when the expression is a list literal.
struct ExprText {
  std::string text;
  std::optional<std::vector<std::string>> elements;

  friend bool operator==(const ExprText&, const ExprText&) = default;
};

struct Assignment {
  std::string variable;
  ExprText value;

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

struct Check {
  CheckKind kind;
  ExprText actual;
  std::optional<ExprText> expected;

  friend bool operator==(const Check&, const Check&) = default;
};

struct TargetStatement {
  std::string statement_text;
  Location location;
  std::vector<std::string> free_names;
  std::vector<std::string> bound_names;
  // Position in the module body when the target is a top-level statement.
  std::optional<std::size_t> top_level_index;
  // 1-based lines of statement_text that continue a multi-line string.
  std::vector<int> string_lines;
};

struct InlineTestDecl {
  std::optional<std::string> test_name;
  bool parameterized = false;
  int repeated = 1;
  std::vector<std::string> tags;
  bool disabled = false;
  std::optional<double> timeout;
  std::vector<ExprText> assumptions;
  std::vector<Assignment> assignments;
  std::vector<Check> checks;
  Location location;
  TargetStatement target;
};

namespace reason {
inline constexpr const char* kUnknownMethod = "UNKNOWN_METHOD";
inline constexpr const char* kNoCheck = "NO_CHECK";
inline constexpr const char* kBadArity = "BAD_ARITY";
inline constexpr const char* kBadConstructorArg = "BAD_CONSTRUCTOR_ARG";
inline constexpr const char* kGivenAfterCheck = "GIVEN_AFTER_CHECK";
inline constexpr const char* kAssumeAfterCheck = "ASSUME_AFTER_CHECK";
inline constexpr const char* kNonIdentifierGivenTarget = "NON_IDENTIFIER_GIVEN_TARGET";
inline constexpr const char* kDuplicateGiven = "DUPLICATE_GIVEN";
inline constexpr const char* kNotAStatement = "NOT_A_STATEMENT";
inline constexpr const char* kParamLengthMismatch = "PARAM_LENGTH_MISMATCH";
inline constexpr const char* kParamNotList = "PARAM_NOT_LIST";
}  // namespace reason

class MalformedError : public CollectionFailure {
 public:
  using CollectionFailure::CollectionFailure;
};

class NoTargetError : public CollectionFailure {
 public:
  explicit NoTargetError(Location where)
      : CollectionFailure(reason::kNoTarget, std::move(where), "inline test has no preceding statement to test") {}
};

// The nearest preceding statement in the same block that is not itself an
// inline test. Throws NoTargetError.
TargetStatement resolve_target(const RawInlineTest& raw, const SourceFile& source);

// Throws MalformedError or NoTargetError.
InlineTestDecl extract_declaration(const RawInlineTest& raw, const SourceFile& source);

// Number of test cases the declaration expands to. Throws MalformedError.
std::size_t validate_parameterization(const InlineTestDecl& decl);

// Given variables the target statement never reads.
std::vector<std::string> unread_given_variables(const InlineTestDecl& decl);

// The check as a method call, e.g. `check_eq(m.group(1), "a")`.
std::string check_source(const Check& check);

// Writes the declaration back as an inline-test chain.
std::string to_chain_source(const InlineTestDecl& decl);

}  // namespace itest
