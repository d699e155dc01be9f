#include "itest/assembler.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>

#include <fmt/format.h>

#include "itest/python/lexer.hpp"
#include "itest/python/names.hpp"
#include "itest/python/parser.hpp"
#include "itest/text.hpp"

namespace fs = std::filesystem;

namespace itest {
namespace {

using py::Stmt;
using py::StmtKind;

bool skip_inline_tests(const Stmt& s) { return is_inline_test_statement(s); }

bool mentions_dunder_name(const py::Expr& e) {
  if (e.kind == py::ExprKind::Name && e.id == "__name__") return true;
  bool found = false;
  py::for_each_child(e, [&](const py::Expr& c) { found = found || mentions_dunder_name(c); });
  return found;
}

std::string import_text(const Stmt& s, const std::string& package) {
  std::vector<std::string> names;
  for (const auto& a : s.names) {
    if (a.asname.empty() && a.name == kConstructorName) continue;
    names.push_back(a.asname.empty() ? a.name : a.name + " as " + a.asname);
  }
  if (names.empty()) return {};
  if (s.kind == StmtKind::Import) return fmt::format("import {}", fmt::join(names, ", "));
  std::string module = std::string(static_cast<std::size_t>(s.level), '.') + s.module;
  if (s.level > 0 && !package.empty()) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= package.size()) {
      std::size_t dot = package.find('.', start);
      if (dot == std::string::npos) dot = package.size();
      parts.push_back(package.substr(start, dot - start));
      start = dot + 1;
    }
    std::size_t up = static_cast<std::size_t>(s.level) - 1;
    if (up < parts.size()) {
      parts.resize(parts.size() - up);
      module = fmt::format("{}", fmt::join(parts, "."));
      if (!s.module.empty()) module += "." + s.module;
    }
  }
  return fmt::format("from {} import {}", module, fmt::join(names, ", "));
}

// Builtins and the constructor name never need copying.
std::vector<std::string> external_names(const py::NameList& names) {
  std::vector<std::string> out;
  for (const auto& n : names) {
    if (!py::is_builtin(n) && n != kConstructorName) out.push_back(n);
  }
  return out;
}

// A statement at column zero moved into an indented block.
std::string indent_statement(const std::string& code, std::string_view prefix) {
  std::vector<int> keep;
  try {
    keep = py::string_continuation_lines(code);
  } catch (const py::SyntaxError&) {
  }
  return text::reindent(code, 0, prefix, keep);
}

ExprText pick(const ExprText& e, bool parameterized, std::size_t i) {
  if (parameterized && e.elements) return {(*e.elements)[i], std::nullopt};
  return {e.text, std::nullopt};
}

constexpr std::string_view kPlumbing = R"PY(import sys as _itest_sys
import json as _itest_json


def _itest_check(kind, check, actual_expr, expected_expr, actual, *expected):
    if kind == "eq":
        ok = actual == expected[0]
    elif kind == "neq":
        ok = actual != expected[0]
    elif kind == "true":
        ok = actual
    elif kind == "false":
        ok = not actual
    elif kind == "none":
        ok = actual is None
    elif kind == "not_none":
        ok = actual is not None
    elif kind == "same":
        ok = actual is expected[0]
    else:
        ok = actual is not expected[0]
    if ok:
        return

    def describe(value):
        try:
            return repr(value)
        except Exception as error:
            return "<repr failed: %s>" % type(error).__name__

    record = {"kind": kind, "check": check, "actual_expr": actual_expr, "actual_repr": describe(actual)}
    if expected:
        record["expected_expr"] = expected_expr
        record["expected_repr"] = describe(expected[0])
    _itest_sys.stdout.flush()
    _itest_sys.stdout.write("\nITEST-FAIL " + _itest_json.dumps(record) + "\n")
    _itest_sys.stdout.flush()
    _itest_sys.exit(1)
)PY";

}  // namespace

PackageInfo package_info(const std::string& path) {
  std::error_code ec;
  fs::path dir = fs::absolute(path, ec).parent_path().lexically_normal();
  std::vector<std::string> parts;
  while (!dir.empty() && fs::exists(dir / "__init__.py", ec)) {
    parts.push_back(dir.filename().string());
    fs::path parent = dir.parent_path();
    if (parent == dir) break;
    dir = parent;
  }
  PackageInfo info;
  std::reverse(parts.begin(), parts.end());
  info.package = fmt::format("{}", fmt::join(parts, "."));
  info.import_root = dir.string();
  return info;
}

ModuleIndex::ModuleIndex(const SourceFile& source, std::string package) : source_(source) {
  const auto& body = source_.module().body;
  entries_.resize(body.size());
  for (std::size_t i = 0; i < body.size(); ++i) {
    const Stmt& s = *body[i];
    Entry& e = entries_[i];
    switch (s.kind) {
      case StmtKind::Import:
      case StmtKind::ImportFrom:
        e.is_import = true;
        e.is_future_import = s.kind == StmtKind::ImportFrom && s.level == 0 && s.module == "__future__";
        if (s.kind == StmtKind::ImportFrom && s.names.size() == 1 && s.names[0].name == "*") {
          e.is_star_import = true;
          e.text = import_text(s, package);
          break;
        }
        e.text = import_text(s, package);
        if (!e.text.empty()) {
          for (const auto& a : s.names) {
            if (a.asname.empty() && a.name == kConstructorName) continue;
            e.bound.push_back(a.bound_name());
          }
        }
        break;
      case StmtKind::If:
        // Script entry points must not run inside a test program.
        if (mentions_dunder_name(*s.value)) break;
        [[fallthrough]];
      case StmtKind::FunctionDef:
      case StmtKind::ClassDef:
      case StmtKind::Assign:
      case StmtKind::AnnAssign:
      case StmtKind::AugAssign:
      case StmtKind::Try:
      case StmtKind::With: {
        py::NameUsage usage = py::analyze_statement(s, skip_inline_tests);
        e.text = statement_source(s, source_).text;
        e.bound = usage.bound.items();
        e.free = external_names(usage.free);
        break;
      }
      default: break;
    }
  }
}

std::vector<std::string> body_free_names(const InlineTestDecl& decl) {
  py::ScopeWalker walker;
  auto read_text = [&](const std::string& text) {
    try {
      walker.read(*py::parse_expression(text));
    } catch (const py::SyntaxError&) {
    }
  };
  for (const auto& a : decl.assumptions) read_text(a.text);
  for (const auto& a : decl.assignments) {
    read_text(a.value.text);
    walker.bind(a.variable);
  }
  for (const auto& n : decl.target.free_names) walker.read_name(n);
  for (const auto& n : decl.target.bound_names) walker.bind(n);
  for (const auto& c : decl.checks) {
    read_text(c.actual.text);
    if (c.expected) read_text(c.expected->text);
  }
  return external_names(walker.finish().free);
}

std::vector<std::string> resolve_dependencies(const InlineTestDecl& decl, const ModuleIndex& index) {
  const auto& entries = index.entries();
  // A top-level target sees only the statements above it; a nested one runs
  // after the whole module has executed.
  std::size_t horizon = decl.target.top_level_index.value_or(entries.size());
  std::map<std::string, std::vector<std::size_t>> binders;
  for (std::size_t i = 0; i < horizon; ++i) {
    for (const auto& n : entries[i].bound) binders[n].push_back(i);
  }

  std::set<std::size_t> selected;
  for (std::size_t i = 0; i < horizon; ++i) {
    if (entries[i].is_future_import) selected.insert(i);
  }
  std::set<std::string> seen;
  std::vector<std::string> queue = body_free_names(decl);
  std::vector<std::string> unresolved;
  for (std::size_t q = 0; q < queue.size(); ++q) {
    std::string name = queue[q];
    if (!seen.insert(name).second) continue;
    auto it = binders.find(name);
    if (it == binders.end()) {
      unresolved.push_back(name);
      continue;
    }
    for (std::size_t i : it->second) {
      if (!selected.insert(i).second) continue;
      for (const auto& n : entries[i].free) queue.push_back(n);
    }
  }
  if (!unresolved.empty()) {
    bool any_star = false;
    for (std::size_t i = 0; i < horizon; ++i) {
      if (entries[i].is_star_import) {
        selected.insert(i);
        any_star = true;
      }
    }
    if (!any_star) throw UnresolvedNameError(decl.location, unresolved.front(), case_id(decl.location, std::nullopt));
  }
  std::vector<std::string> support;
  for (std::size_t i : selected) support.push_back(entries[i].text);
  return support;
}

std::string case_id(const Location& location, std::optional<std::size_t> param_index) {
  std::string id = fmt::format("{}::{}", location.path, location.line);
  if (param_index) id += fmt::format("[p{}]", *param_index);
  return id;
}

std::vector<TestCase> expand(std::shared_ptr<const InlineTestDecl> decl, std::size_t n,
                             const std::vector<std::string>& support, std::optional<double> default_timeout) {
  std::vector<TestCase> cases;
  for (std::size_t i = 0; i < n; ++i) {
    TestCase c;
    c.id = case_id(decl->location, decl->parameterized ? std::optional<std::size_t>(i) : std::nullopt);
    c.display_name = decl->test_name.value_or(c.id);
    c.decl = decl;
    c.param_index = i;
    c.path = decl->location.path;
    c.line = decl->location.line;
    c.tags = decl->tags;
    c.disabled = decl->disabled;
    c.repeated = decl->repeated;
    c.timeout = decl->timeout ? decl->timeout : default_timeout;

    TestProgram& p = c.program;
    p.source_file = std::filesystem::absolute(decl->location.path).lexically_normal().string();
    p.support_statements = support;
    for (const auto& a : decl->assignments) {
      p.input_statements.push_back(a.variable + " = " + pick(a.value, decl->parameterized, i).text);
    }
    p.target_text = decl->target.statement_text;
    p.target_string_lines = decl->target.string_lines;
    p.target_column = decl->target.location.col;
    for (const auto& check : decl->checks) {
      Check instance{check.kind, pick(check.actual, decl->parameterized, i), std::nullopt};
      if (check.expected) instance.expected = pick(*check.expected, decl->parameterized, i);
      std::string kind(to_string(check.kind));
      std::string args = fmt::format("{}, {}, {}, {}", text::py_string_literal(kind),
                                     text::py_string_literal(check_source(instance)),
                                     text::py_string_literal(instance.actual.text),
                                     instance.expected ? text::py_string_literal(instance.expected->text) : "None");
      args += ", " + instance.actual.text;
      if (instance.expected) args += ", " + instance.expected->text;
      p.assertion_statements.push_back("_itest_check(" + args + ")");
    }
    if (!decl->assumptions.empty()) {
      std::vector<std::string> parts;
      for (const auto& a : decl->assumptions) parts.push_back("(" + a.text + ")");
      p.assumption_expr = fmt::format("{}", fmt::join(parts, " and "));
    }
    cases.push_back(std::move(c));
  }
  return cases;
}

std::string generate_program(const TestCase& test_case) {
  const TestProgram& p = test_case.program;
  std::string out;
  // Future imports must precede every other statement.
  for (const auto& s : p.support_statements) {
    if (s.rfind("from __future__ ", 0) == 0) out += s + "\n";
  }
  out += kPlumbing;
  if (!p.source_file.empty()) out += "__file__ = " + text::py_string_literal(p.source_file) + "\n";
  out += "\n";
  for (const auto& s : p.support_statements) {
    if (s.rfind("from __future__ ", 0) != 0) out += s + "\n";
  }
  out += "\n";
  std::string_view prefix = p.assumption_expr ? "    " : "";
  if (p.assumption_expr) out += "if " + *p.assumption_expr + ":\n";
  for (const auto& s : p.input_statements) out += indent_statement(s, prefix) + "\n";
  out += text::reindent(p.target_text, p.target_column, prefix, p.target_string_lines) + "\n";
  for (const auto& s : p.assertion_statements) out += indent_statement(s, prefix) + "\n";
  out += fmt::format("{}_itest_sys.stdout.flush()\n", prefix);
  out += fmt::format("{}_itest_sys.stdout.write(\"\\n{}\\n\")\n", prefix, sentinel::kPass);
  if (p.assumption_expr) {
    out += "else:\n";
    out += fmt::format("    _itest_sys.stdout.write(\"\\n{}\\n\")\n", sentinel::kSkipAssumption);
  }
  return out;
}

}  // namespace itest
