#include "itest/python/names.hpp"

#include <algorithm>
#include <iterator>

namespace itest::py {
namespace {

// dir(builtins) of CPython 3.10-3.13, plus the module and class dunders that
// every namespace has.
constexpr std::string_view kBuiltins[] = {
    "ArithmeticError", "AssertionError", "AttributeError", "BaseException",
    "BaseExceptionGroup", "BlockingIOError", "BrokenPipeError", "BufferError", "BytesWarning",
    "ChildProcessError", "ConnectionAbortedError", "ConnectionError", "ConnectionRefusedError",
    "ConnectionResetError", "DeprecationWarning", "EOFError", "Ellipsis", "EncodingWarning",
    "EnvironmentError", "Exception", "ExceptionGroup", "False", "FileExistsError",
    "FileNotFoundError", "FloatingPointError", "FutureWarning", "GeneratorExit", "IOError",
    "ImportError", "ImportWarning", "IndentationError", "IndexError", "InterruptedError",
    "IsADirectoryError", "KeyError", "KeyboardInterrupt", "LookupError", "MemoryError",
    "ModuleNotFoundError", "NameError", "None", "NotADirectoryError", "NotImplemented",
    "NotImplementedError", "OSError", "OverflowError", "PendingDeprecationWarning",
    "PermissionError", "ProcessLookupError", "PythonFinalizationError", "RecursionError",
    "ReferenceError", "ResourceWarning", "RuntimeError", "RuntimeWarning", "StopAsyncIteration",
    "StopIteration", "SyntaxError", "SyntaxWarning", "SystemError", "SystemExit", "TabError",
    "TimeoutError", "True", "TypeError", "UnboundLocalError", "UnicodeDecodeError",
    "UnicodeEncodeError", "UnicodeError", "UnicodeTranslateError", "UnicodeWarning",
    "UserWarning", "ValueError", "Warning", "ZeroDivisionError", "__build_class__",
    "__builtins__", "__debug__", "__doc__", "__file__", "__import__", "__loader__", "__name__",
    "__package__", "__spec__", "__annotations__", "__cached__", "abs", "aiter", "all", "anext",
    "any", "ascii", "bin", "bool", "breakpoint", "bytearray", "bytes", "callable", "chr",
    "classmethod", "compile", "complex", "copyright", "credits", "delattr", "dict", "dir",
    "divmod", "enumerate", "eval", "exec", "exit", "filter", "float", "format", "frozenset",
    "getattr", "globals", "hasattr", "hash", "help", "hex", "id", "input", "int", "isinstance",
    "issubclass", "iter", "len", "license", "list", "locals", "map", "max", "memoryview", "min",
    "next", "object", "oct", "open", "ord", "pow", "print", "property", "quit", "range", "repr",
    "reversed", "round", "set", "setattr", "slice", "sorted", "staticmethod", "str", "sum",
    "super", "tuple", "type", "vars", "zip", "__class__", "__qualname__", "__module__"};

}  // namespace

bool is_builtin(std::string_view name) {
  return std::find(std::begin(kBuiltins), std::end(kBuiltins), name) != std::end(kBuiltins);
}

ScopeWalker::ScopeWalker(StatementFilter skip, Mode mode, ScopeWalker* parent)
    : skip_(std::move(skip)), mode_(mode), parent_(parent) {}

void ScopeWalker::read_name(const std::string& name) {
  if (mode_ == Mode::Function) {
    reads_.add(name);
    return;
  }
  if (!bound_.contains(name)) reads_.add(name);
}

void ScopeWalker::deferred(const std::string& name) {
  if (mode_ == Mode::Class) {
    passthrough_.add(name);
  } else {
    deferred_.add(name);
  }
}

void ScopeWalker::bind(const std::string& name) {
  if (mode_ == Mode::Function && declared_.count(name)) {
    // `global x; x = 1` rebinds the outer name and reads nothing.
    return;
  }
  bound_.add(name);
}

void ScopeWalker::bind_target(const Expr& target) {
  switch (target.kind) {
    case ExprKind::Name: bind(target.id); break;
    case ExprKind::Starred: bind_target(*target.children[0]); break;
    case ExprKind::Tuple:
    case ExprKind::List:
      for (const auto& c : target.children) bind_target(*c);
      break;
    case ExprKind::Attribute: read(*target.children[0]); break;
    case ExprKind::Subscript:
      read(*target.children[0]);
      read(*target.children[1]);
      break;
    default: read(target); break;
  }
}

void ScopeWalker::read(const Expr& expr) {
  switch (expr.kind) {
    case ExprKind::Name: read_name(expr.id); return;
    case ExprKind::NamedExpr: {
      read(*expr.children[1]);
      const std::string& name = expr.children[0]->id;
      // An assignment expression inside a comprehension binds in the
      // enclosing function or module namespace.
      ScopeWalker* target = this;
      while (target->parent_ && target->mode_ == Mode::Function && target->is_comprehension_) {
        target = target->parent_;
      }
      target->bind(name);
      if (target != this) bind(name);
      return;
    }
    case ExprKind::Lambda:
      for (const auto& p : expr.params->params) {
        if (p.default_value) read(*p.default_value);
      }
      function_scope(expr.params.get(), nullptr, expr.children[0].get());
      return;
    case ExprKind::ListComp:
    case ExprKind::SetComp:
    case ExprKind::GeneratorExp:
    case ExprKind::DictComp: comprehension(expr); return;
    default: break;
  }
  if (expr.params) {
    for (const auto& p : expr.params->params) {
      if (p.default_value) read(*p.default_value);
    }
  }
  for (const auto& c : expr.children) {
    if (c) read(*c);
  }
}

void ScopeWalker::comprehension(const Expr& comp) {
  // The first iterable is evaluated in the enclosing scope; everything else
  // runs in the comprehension's own scope, immediately.
  read(*comp.generators.front().iter);
  ScopeWalker inner(skip_, Mode::Function, this);
  inner.is_comprehension_ = true;
  for (std::size_t i = 0; i < comp.generators.size(); ++i) {
    const auto& g = comp.generators[i];
    if (i > 0) inner.read(*g.iter);
    inner.bind_target(*g.target);
    for (const auto& cond : g.conditions) inner.read(*cond);
  }
  for (const auto& c : comp.children) inner.read(*c);
  NameUsage usage = inner.finish();
  for (const auto& name : usage.free) read_name(name);
  for (const auto& name : inner.deferred_) deferred(name);
}

void ScopeWalker::function_scope(const Parameters* params, const Block* body,
                                 const Expr* lambda_body) {
  ScopeWalker inner(skip_, Mode::Function, this);
  if (params) {
    for (const auto& p : params->params) inner.bind(p.name);
  }
  if (body) inner.statements(*body);
  if (lambda_body) inner.read(*lambda_body);
  NameUsage usage = inner.finish();
  for (const auto& name : usage.free) deferred(name);
}

void ScopeWalker::pattern(const Expr& p) {
  switch (p.kind) {
    case ExprKind::MatchValue: read(*p.children[0]); return;
    case ExprKind::MatchCapture:
      if (!p.children.empty()) pattern(*p.children[0]);
      bind(p.id);
      return;
    case ExprKind::MatchStar:
      if (!p.id.empty()) bind(p.id);
      return;
    case ExprKind::MatchWildcard: return;
    case ExprKind::MatchMapping:
      for (std::size_t i = 0; i + 1 < p.children.size(); i += 2) {
        read(*p.children[i]);
        pattern(*p.children[i + 1]);
      }
      if (!p.id.empty()) bind(p.id);
      return;
    case ExprKind::MatchClass:
      read(*p.children[0]);
      for (std::size_t i = 1; i < p.children.size(); ++i) pattern(*p.children[i]);
      return;
    case ExprKind::MatchKeyword: pattern(*p.children[0]); return;
    case ExprKind::MatchSequence:
    case ExprKind::MatchOr:
      for (const auto& c : p.children) pattern(*c);
      return;
    default: read(p); return;
  }
}

void ScopeWalker::statements(const Block& block) {
  for (const auto& s : block) statement(*s);
}

void ScopeWalker::statement(const Stmt& s) {
  if (skip_ && skip_(s)) return;
  auto read_opt = [&](const ExprPtr& e) {
    if (e) read(*e);
  };
  switch (s.kind) {
    case StmtKind::Expr:
    case StmtKind::Return: read_opt(s.value); break;
    case StmtKind::Assign:
      read(*s.value);
      for (const auto& t : s.targets) bind_target(*t);
      break;
    case StmtKind::AugAssign: {
      const Expr& t = *s.targets[0];
      if (t.kind == ExprKind::Name) read_name(t.id);
      read(*s.value);
      bind_target(t);
      break;
    }
    case StmtKind::AnnAssign: {
      const Expr& t = *s.targets[0];
      read(*s.annotation);
      read_opt(s.value);
      if (s.value || (mode_ == Mode::Function && t.kind == ExprKind::Name)) {
        bind_target(t);
      } else if (t.kind != ExprKind::Name) {
        bind_target(t);
      }
      break;
    }
    case StmtKind::Pass:
    case StmtKind::Break:
    case StmtKind::Continue: break;
    case StmtKind::Raise:
      read_opt(s.value);
      read_opt(s.annotation);
      break;
    case StmtKind::Global:
    case StmtKind::Nonlocal:
      if (mode_ == Mode::Function) {
        for (const auto& id : s.identifiers) {
          declared_.insert(id);
          reads_.add(id);
        }
      }
      break;
    case StmtKind::Delete:
      for (const auto& t : s.targets) {
        if (t->kind == ExprKind::Name) {
          read_name(t->id);
          if (mode_ == Mode::Function) bind(t->id);
        } else {
          bind_target(*t);
        }
      }
      break;
    case StmtKind::Assert:
      read(*s.value);
      read_opt(s.annotation);
      break;
    case StmtKind::Import:
    case StmtKind::ImportFrom:
      for (const auto& alias : s.names) {
        if (alias.name != "*") bind(alias.bound_name());
      }
      break;
    case StmtKind::If:
    case StmtKind::While:
      read(*s.value);
      statements(s.body);
      statements(s.orelse);
      break;
    case StmtKind::For:
      read(*s.value);
      bind_target(*s.targets[0]);
      statements(s.body);
      statements(s.orelse);
      break;
    case StmtKind::Try:
      statements(s.body);
      for (const auto& h : s.handlers) {
        read_opt(h.type);
        if (!h.name.empty()) bind(h.name);
        statements(h.body);
      }
      statements(s.orelse);
      statements(s.finalbody);
      break;
    case StmtKind::With:
      for (const auto& item : s.items) {
        read(*item.context);
        if (item.var) bind_target(*item.var);
      }
      statements(s.body);
      break;
    case StmtKind::FunctionDef:
      for (const auto& d : s.decorators) read(*d);
      if (s.params) {
        for (const auto& p : s.params->params) {
          if (p.default_value) read(*p.default_value);
          if (p.annotation) read(*p.annotation);
        }
      }
      if (s.annotation) read(*s.annotation);
      function_scope(s.params.get(), &s.body, nullptr);
      bind(s.name);
      break;
    case StmtKind::ClassDef: {
      for (const auto& d : s.decorators) read(*d);
      for (const auto& b : s.bases) read(*b);
      ScopeWalker inner(skip_, Mode::Class, this);
      inner.statements(s.body);
      NameUsage usage = inner.finish();
      for (const auto& name : usage.free) read_name(name);
      for (const auto& name : inner.passthrough_) deferred(name);
      bind(s.name);
      break;
    }
    case StmtKind::Match:
      read(*s.value);
      for (const auto& c : s.cases) {
        pattern(*c.pattern);
        read_opt(c.guard);
        statements(c.body);
      }
      break;
  }
}

NameUsage ScopeWalker::finish() const {
  NameUsage usage;
  switch (mode_) {
    case Mode::Function:
      for (const auto& name : reads_) {
        if (!bound_.contains(name) || declared_.count(name)) usage.free.add(name);
      }
      for (const auto& name : deferred_) {
        if (!bound_.contains(name) || declared_.count(name)) usage.free.add(name);
      }
      break;
    case Mode::Sequential:
      for (const auto& name : reads_) usage.free.add(name);
      for (const auto& name : deferred_) {
        if (!bound_.contains(name)) usage.free.add(name);
      }
      break;
    case Mode::Class:
      // Method bodies do not see class-level names; their reads are reported
      // separately through passthrough_.
      for (const auto& name : reads_) usage.free.add(name);
      break;
  }
  usage.bound = bound_;
  return usage;
}

NameUsage analyze_block(const Block& block, const StatementFilter& skip) {
  ScopeWalker walker(skip);
  walker.statements(block);
  return walker.finish();
}

NameUsage analyze_statement(const Stmt& stmt, const StatementFilter& skip) {
  ScopeWalker walker(skip);
  walker.statement(stmt);
  return walker.finish();
}

NameUsage analyze_expression(const Expr& expr) {
  ScopeWalker walker;
  walker.read(expr);
  return walker.finish();
}

}  // namespace itest::py
