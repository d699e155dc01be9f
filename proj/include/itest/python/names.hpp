#pragma once

// Name binding analysis: which identifiers a piece of code reads before it
// binds them (its free names) and which it binds.

#include <functional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "itest/python/ast.hpp"

namespace itest::py {

// Insertion-ordered set of identifiers.
class NameList {
 public:
  bool add(const std::string& name) {
    if (!index_.insert(name).second) return false;
    order_.push_back(name);
    return true;
  }
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  const std::vector<std::string>& items() const { return order_; }
  std::size_t size() const { return order_.size(); }
  bool empty() const { return order_.empty(); }

  auto begin() const { return order_.begin(); }
  auto end() const { return order_.end(); }

 private:
  std::vector<std::string> order_;
  std::set<std::string> index_;
};

struct NameUsage {
  NameList free;   // read before any binding, in first-use order
  NameList bound;  // bound at the analyzed scope level
};

// Statements for which the predicate returns true are ignored entirely.
using StatementFilter = std::function<bool(const Stmt&)>;

// Walks code that executes top to bottom in a single namespace (a module
// body, or a sequence of statements pasted into one). A name is free when it
// is read before the walk has seen a binding for it. Reads made from nested
// function bodies happen later, at call time, so they only count as free if
// the name is never bound in this namespace.
class ScopeWalker {
 public:
  enum class Mode { Sequential, Function, Class };

  explicit ScopeWalker(StatementFilter skip = {}, Mode mode = Mode::Sequential,
                       ScopeWalker* parent = nullptr);

  void read(const Expr& expr);
  void read_name(const std::string& name);
  void bind(const std::string& name);
  void bind_target(const Expr& target);
  void statement(const Stmt& stmt);
  void statements(const Block& block);

  NameUsage finish() const;

 private:
  void deferred(const std::string& name);
  void pattern(const Expr& p);
  void function_scope(const Parameters* params, const Block* body, const Expr* lambda_body);
  void comprehension(const Expr& comp);

  StatementFilter skip_;
  Mode mode_;
  ScopeWalker* parent_;
  NameList reads_;      // immediate reads not yet bound (Sequential/Class) or all reads (Function)
  NameList deferred_;   // reads from nested functions
  NameList passthrough_;  // deferred reads that bypass a class namespace
  NameList bound_;
  std::set<std::string> declared_;  // global / nonlocal names
  bool is_comprehension_ = false;
};

// Analyzes a block as one sequential namespace.
NameUsage analyze_block(const Block& block, const StatementFilter& skip = {});
NameUsage analyze_statement(const Stmt& stmt, const StatementFilter& skip = {});
NameUsage analyze_expression(const Expr& expr);

bool is_builtin(std::string_view name);

}  // namespace itest::py
