#pragma once

// Syntax tree for the subset of Python 3 that the analyzer understands
// (everything up to and including 3.10 structural pattern matching).
//
// Nodes are plain structs owned through unique_ptr. Expression nodes share a
// single layout; the meaning of `children` per kind is listed next to
// ExprKind. Positions follow CPython's ast module: 1-based lines, 0-based
// byte columns, end position exclusive.

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace itest::py {

struct Pos {
  int line = 1;
  int col = 0;

  friend bool operator==(const Pos&, const Pos&) = default;
  friend auto operator<=>(const Pos&, const Pos&) = default;
};

struct Span {
  Pos begin;
  Pos end;

  friend bool operator==(const Span&, const Span&) = default;
};

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(std::string message, Pos where)
      : std::runtime_error(message + " (line " + std::to_string(where.line) +
                           ", column " + std::to_string(where.col) + ")"),
        message_(std::move(message)),
        where_(where) {}

  const std::string& message() const { return message_; }
  Pos where() const { return where_; }

 private:
  std::string message_;
  Pos where_;
};

enum class ExprKind {
  Name,          // id
  Constant,      // id = "num" | "str" | "bytes" | "True" | "False" | "None" | "Ellipsis"
  FormattedStr,  // children = embedded replacement-field expressions
  Attribute,     // children[0] = value, id = attribute name
  Subscript,     // children[0] = value, children[1] = slice
  Slice,         // children = lower, upper, step (each may be null)
  Call,          // children[0] = callee, rest = arguments (Starred / Keyword / plain)
  Keyword,       // id = name ("" for **value), children[0] = value
  Starred,       // children[0]
  UnaryOp,       // id = operator, children[0]
  BinOp,         // id = operator, children = left, right
  BoolOp,        // id = "and" | "or", children = operands
  Compare,       // children = operands, ops = operators between them
  IfExp,         // children = body, test, orelse
  Lambda,        // params, children[0] = body
  NamedExpr,     // children = target (Name), value
  Tuple,         // children = elements
  List,          // children = elements
  Set,           // children = elements
  Dict,          // children = key, value pairs; null key means **value
  ListComp,      // children[0] = element, generators
  SetComp,       // children[0] = element, generators
  GeneratorExp,  // children[0] = element, generators
  DictComp,      // children = key, value; generators
  Await,         // children[0]
  Yield,         // children = optional value
  YieldFrom,     // children[0]

  // Patterns (only inside `case` clauses).
  MatchValue,     // children[0] = literal or dotted-name value
  MatchCapture,   // id = bound name; children = optional sub-pattern of `p as name`
  MatchWildcard,  // `_`
  MatchStar,      // id = bound name, "" for `*_`
  MatchSequence,  // children = element patterns
  MatchMapping,   // children = key, pattern pairs; id = `**rest` name or ""
  MatchClass,     // children[0] = class expression, rest = patterns / MatchKeyword
  MatchKeyword,   // id = attribute name, children[0] = pattern
  MatchOr,        // children = alternatives
};

struct Expr;
struct Stmt;
using ExprPtr = std::unique_ptr<Expr>;
using StmtPtr = std::unique_ptr<Stmt>;
using Block = std::vector<StmtPtr>;

enum class ParamKind { PositionalOnly, Normal, VarArgs, KeywordOnly, VarKeywords };

struct Param {
  std::string name;
  ParamKind kind = ParamKind::Normal;
  ExprPtr annotation;
  ExprPtr default_value;
  Span span;
};

struct Parameters {
  std::vector<Param> params;
};

struct Comprehension {
  ExprPtr target;
  ExprPtr iter;
  std::vector<ExprPtr> conditions;
  bool is_async = false;
};

struct Expr {
  ExprKind kind;
  Span span;
  std::string id;
  std::vector<ExprPtr> children;
  std::vector<std::string> ops;
  std::vector<Comprehension> generators;
  std::unique_ptr<Parameters> params;

  explicit Expr(ExprKind k, Span s = {}) : kind(k), span(s) {}

  const Expr* child(std::size_t i) const {
    return i < children.size() ? children[i].get() : nullptr;
  }
};

enum class StmtKind {
  Expr,
  Assign,
  AugAssign,
  AnnAssign,
  Pass,
  Break,
  Continue,
  Return,
  Raise,
  Global,
  Nonlocal,
  Delete,
  Assert,
  Import,
  ImportFrom,
  If,
  While,
  For,
  Try,
  With,
  FunctionDef,
  ClassDef,
  Match,
};

struct Alias {
  std::string name;    // dotted module path for `import`, member for `from`
  std::string asname;  // empty when absent
  Span span;

  // Name bound in the importing scope.
  std::string bound_name() const {
    if (!asname.empty()) return asname;
    return name.substr(0, name.find('.'));
  }
};

struct WithItem {
  ExprPtr context;
  ExprPtr var;
};

struct ExceptHandler {
  ExprPtr type;
  std::string name;
  Span span;
  Block body;
};

struct MatchCase {
  ExprPtr pattern;
  ExprPtr guard;
  Span span;
  Block body;
};

// Field usage per kind:
//   Expr        value
//   Assign      targets (one per `=`), value
//   AugAssign   targets[0], op, value
//   AnnAssign   targets[0], annotation, value (may be null)
//   Return      value (may be null)
//   Raise       value = exception, annotation = cause (both may be null)
//   Delete      targets
//   Assert      value = test, annotation = message
//   Global/Nonlocal  identifiers
//   Import      names
//   ImportFrom  module, level, names (a single "*" alias for star imports)
//   If/While    value = test, body, orelse
//   For         targets[0], value = iterable, body, orelse, is_async
//   Try         body, handlers, orelse, finalbody, is_star
//   With        items, body, is_async
//   FunctionDef name, decorators, params, annotation = return annotation, body
//   ClassDef    name, decorators, bases (plain expressions and Keyword nodes), body
//   Match       value = subject, cases
struct Stmt {
  StmtKind kind;
  Span span;  // starts at the first decorator for decorated definitions

  std::string name;
  std::string op;
  std::string module;
  int level = 0;
  bool is_async = false;
  bool is_star = false;

  std::vector<ExprPtr> targets;
  ExprPtr value;
  ExprPtr annotation;
  std::vector<ExprPtr> decorators;
  std::unique_ptr<Parameters> params;
  std::vector<ExprPtr> bases;
  std::vector<WithItem> items;
  std::vector<Alias> names;
  std::vector<std::string> identifiers;
  Block body;
  Block orelse;
  Block finalbody;
  std::vector<ExceptHandler> handlers;
  std::vector<MatchCase> cases;

  explicit Stmt(StmtKind k, Span s = {}) : kind(k), span(s) {}
};

struct Module {
  Block body;
};

std::string_view to_string(StmtKind kind);
std::string_view to_string(ExprKind kind);

// Calls fn(const Block&) for every statement list nested directly in stmt.
template <typename Fn>
void for_each_block(const Stmt& stmt, Fn&& fn) {
  fn(stmt.body);
  for (const auto& handler : stmt.handlers) fn(handler.body);
  for (const auto& c : stmt.cases) fn(c.body);
  fn(stmt.orelse);
  fn(stmt.finalbody);
}

// Calls fn(const Expr&) for every expression owned directly by stmt (not by
// nested statements), in source order.
template <typename Fn>
void for_each_expr(const Stmt& stmt, Fn&& fn) {
  auto visit = [&](const ExprPtr& e) {
    if (e) fn(*e);
  };
  for (const auto& d : stmt.decorators) visit(d);
  if (stmt.params) {
    for (const auto& p : stmt.params->params) {
      visit(p.annotation);
      visit(p.default_value);
    }
  }
  for (const auto& b : stmt.bases) visit(b);
  for (const auto& t : stmt.targets) visit(t);
  if (stmt.kind == StmtKind::AnnAssign) visit(stmt.annotation);
  visit(stmt.value);
  for (const auto& item : stmt.items) {
    visit(item.context);
    visit(item.var);
  }
  for (const auto& h : stmt.handlers) visit(h.type);
  for (const auto& c : stmt.cases) {
    visit(c.pattern);
    visit(c.guard);
  }
  if (stmt.kind != StmtKind::AnnAssign) visit(stmt.annotation);
}

// Calls fn(const Expr&) for every direct sub-expression of expr, including
// comprehension parts and lambda parameter defaults.
template <typename Fn>
void for_each_child(const Expr& expr, Fn&& fn) {
  if (expr.params) {
    for (const auto& p : expr.params->params) {
      if (p.default_value) fn(*p.default_value);
    }
  }
  for (const auto& c : expr.children) {
    if (c) fn(*c);
  }
  for (const auto& g : expr.generators) {
    if (g.target) fn(*g.target);
    if (g.iter) fn(*g.iter);
    for (const auto& cond : g.conditions) fn(*cond);
  }
}

}  // namespace itest::py
