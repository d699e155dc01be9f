#include "itest/finder.hpp"

#include <algorithm>

namespace itest {
namespace {

using py::Expr;
using py::ExprKind;
using py::Stmt;
using py::StmtKind;

const Expr* chain_root(const Expr& expr) {
  const Expr* e = &expr;
  while (e->kind == ExprKind::Call) {
    const Expr& callee = *e->children[0];
    if (callee.kind == ExprKind::Name) return e;
    if (callee.kind != ExprKind::Attribute) return nullptr;
    e = callee.children[0].get();
  }
  return nullptr;
}

bool contains_constructor_call(const Expr& expr) {
  if (expr.kind == ExprKind::Call && expr.children[0]->kind == ExprKind::Name &&
      expr.children[0]->id == kConstructorName) {
    return true;
  }
  bool found = false;
  py::for_each_child(expr, [&](const Expr& c) { found = found || contains_constructor_call(c); });
  return found;
}

class Finder {
 public:
  explicit Finder(const SourceFile& source) : source_(source) {}

  void block(const py::Block& b) {
    for (std::size_t i = 0; i < b.size(); ++i) {
      const Stmt& s = *b[i];
      if (is_inline_test_statement(s)) {
        add(s, s.value.get(), b, i, false);
        continue;
      }
      const Expr* embedded = nullptr;
      py::for_each_expr(s, [&](const Expr& e) {
        if (!embedded && contains_constructor_call(e)) embedded = &e;
      });
      if (embedded) add(s, embedded, b, i, true);
      py::for_each_block(s, [&](const py::Block& inner) { block(inner); });
    }
  }

  std::vector<RawInlineTest> result;

 private:
  void add(const Stmt& s, const Expr* chain, const py::Block& b, std::size_t i, bool embedded) {
    RawInlineTest raw;
    raw.statement = &s;
    raw.chain = chain;
    raw.location = {source_.path(), s.span.begin.line, s.span.begin.col};
    raw.enclosing_block = &b;
    raw.index_in_block = i;
    raw.embedded = embedded;
    result.push_back(raw);
  }

  const SourceFile& source_;
};

bool any_marker_import(const py::Block& block) {
  for (const auto& s : block) {
    if (is_marker_import(*s)) return true;
    bool nested = false;
    py::for_each_block(*s, [&](const py::Block& b) { nested = nested || any_marker_import(b); });
    if (nested) return true;
  }
  return false;
}

}  // namespace

bool is_marker_import(const Stmt& stmt) {
  if (stmt.kind != StmtKind::Import && stmt.kind != StmtKind::ImportFrom) return false;
  for (const auto& alias : stmt.names) {
    if (alias.asname.empty() && alias.name == kConstructorName) return true;
  }
  return false;
}

bool has_marker_import(const py::Module& module) { return any_marker_import(module.body); }

bool is_inline_test_chain(const Expr& expr) {
  const Expr* root = chain_root(expr);
  return root && root->children[0]->id == kConstructorName;
}

bool is_inline_test_statement(const Stmt& stmt) {
  return stmt.kind == StmtKind::Expr && is_inline_test_chain(*stmt.value);
}

StatementSource statement_source(const Stmt& stmt, const SourceFile& source) {
  std::vector<const Stmt*> nested;
  auto collect = [&](auto&& self, const py::Block& b) -> void {
    for (const auto& s : b) {
      if (is_inline_test_statement(*s)) {
        nested.push_back(s.get());
      } else {
        py::for_each_block(*s, [&](const py::Block& inner) { self(self, inner); });
      }
    }
  };
  py::for_each_block(stmt, [&](const py::Block& b) { collect(collect, b); });
  std::sort(nested.begin(), nested.end(),
            [](const Stmt* a, const Stmt* b) { return a->span.begin < b->span.begin; });

  const int first_line = stmt.span.begin.line;
  std::vector<int> dropped;
  std::string text;
  py::Pos cursor = stmt.span.begin;
  for (const Stmt* s : nested) {
    text += source.slice({cursor, s->span.begin});
    // Keep one line per original line so string positions stay valid.
    std::string_view head = source.slice({{s->span.begin.line, 0}, s->span.begin});
    std::string indent(head.substr(0, std::min(head.size(), head.find_first_not_of(" \t"))));
    text += "pass";
    for (int line = s->span.begin.line + 1; line <= s->span.end.line; ++line) {
      text += "\n" + indent + "pass";
      dropped.push_back(line);
    }
    cursor = s->span.end;
  }
  text += source.slice({cursor, stmt.span.end});

  StatementSource out;
  out.text = std::move(text);
  for (int line : source.string_lines()) {
    if (line <= first_line || line > stmt.span.end.line) continue;
    if (std::find(dropped.begin(), dropped.end(), line) != dropped.end()) continue;
    out.string_lines.push_back(line - first_line + 1);
  }
  return out;
}

std::vector<RawInlineTest> find_inline_tests(const SourceFile& source) {
  if (!has_marker_import(source.module())) return {};
  Finder finder(source);
  finder.block(source.module().body);
  return std::move(finder.result);
}

}  // namespace itest
