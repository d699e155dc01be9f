#include "itest/python/parser.hpp"

#include <array>
#include <string>
#include <unordered_map>
#include <utility>

#include "itest/python/lexer.hpp"

namespace itest::py {
ExprPtr parse_field(std::string_view source, Pos origin);

namespace {

constexpr std::array<std::string_view, 13> kAugmentedOps = {
    "+=", "-=", "*=", "/=", "//=", "%=", "@=", "&=", "|=", "^=", ">>=", "<<=", "**="};

std::string describe(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Call: return "function call";
    case ExprKind::Constant:
      if (e.id == "None" || e.id == "True" || e.id == "False") return e.id;
      if (e.id == "Ellipsis") return "ellipsis";
      return "literal";
    case ExprKind::FormattedStr: return "f-string expression";
    case ExprKind::BinOp:
    case ExprKind::UnaryOp: return "expression";
    case ExprKind::BoolOp: return "expression";
    case ExprKind::Compare: return "comparison";
    case ExprKind::IfExp: return "conditional expression";
    case ExprKind::Lambda: return "lambda";
    case ExprKind::NamedExpr: return "named expression";
    case ExprKind::Set: return "set display";
    case ExprKind::Dict: return "dict literal";
    case ExprKind::ListComp: return "list comprehension";
    case ExprKind::SetComp: return "set comprehension";
    case ExprKind::DictComp: return "dict comprehension";
    case ExprKind::GeneratorExp: return "generator expression";
    case ExprKind::Await: return "await expression";
    case ExprKind::Yield:
    case ExprKind::YieldFrom: return "yield expression";
    case ExprKind::Starred: return "starred";
    default: return "expression";
  }
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  Module module() {
    Module m;
    while (!peek().kind_is(TokenKind::EndMarker)) {
      statement(m.body);
    }
    return m;
  }

  ExprPtr standalone_expression() {
    Pos begin = cur().begin;
    ExprPtr e = star_named_expression();
    if (at_keyword("for") || (at_keyword("async") && peek(1).is_name("for"))) {
      e = comprehension(ExprKind::GeneratorExp, std::move(e), begin);
    }
    if (!peek().kind_is(TokenKind::EndMarker)) fail_here("invalid syntax");
    return e;
  }

  // The inside of an f-string replacement field, which behaves like the
  // inside of parentheses.
  ExprPtr field_expression() {
    Pos begin = cur().begin;
    ExprPtr e = at_keyword("yield") ? yield_expression() : star_expressions();
    if (at_keyword("for") || (at_keyword("async") && peek(1).is_name("for"))) {
      e = comprehension(ExprKind::GeneratorExp, std::move(e), begin);
    }
    if (!peek().kind_is(TokenKind::EndMarker)) fail_here("invalid syntax");
    return e;
  }

 private:
  struct Tok {
    const Token* t;
    bool kind_is(TokenKind k) const { return t->kind == k; }
    bool is_op(std::string_view s) const { return t->is_op(s); }
    bool is_name(std::string_view s) const { return t->is_name(s); }
  };

  // ---- token helpers -----------------------------------------------------

  Tok peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(i_ + ahead, toks_.size() - 1);
    return {&toks_[i]};
  }
  const Token& cur() const { return toks_[std::min(i_, toks_.size() - 1)]; }
  const Token& advance() {
    const Token& t = cur();
    if (i_ < toks_.size() - 1) ++i_;
    return t;
  }
  Pos last_end() const { return i_ == 0 ? cur().begin : toks_[i_ - 1].end; }

  bool at_op(std::string_view s) const { return cur().is_op(s); }
  bool at_keyword(std::string_view s) const { return cur().is_name(s); }
  bool accept_op(std::string_view s) {
    if (!at_op(s)) return false;
    advance();
    return true;
  }
  bool accept_keyword(std::string_view s) {
    if (!at_keyword(s)) return false;
    advance();
    return true;
  }

  [[noreturn]] void fail_here(const std::string& message) const {
    const Token& t = cur();
    if (t.kind == TokenKind::Indent) throw SyntaxError("unexpected indent", t.end);
    if (t.kind == TokenKind::EndMarker && message == "invalid syntax") {
      throw SyntaxError("unexpected EOF while parsing", t.begin);
    }
    throw SyntaxError(message, t.begin);
  }
  [[noreturn]] static void fail_at(const std::string& message, Pos where) {
    throw SyntaxError(message, where);
  }

  void expect_op(std::string_view s) {
    if (!accept_op(s)) {
      if (s == ":") fail_here("expected ':'");
      fail_here("invalid syntax");
    }
  }
  void expect_keyword(std::string_view s) {
    if (!accept_keyword(s)) fail_here("invalid syntax");
  }
  std::string identifier() {
    const Token& t = cur();
    if (t.kind != TokenKind::Name || is_keyword(t.text)) fail_here("invalid syntax");
    advance();
    return std::string(t.text);
  }
  bool at_identifier() const {
    return cur().kind == TokenKind::Name && !is_keyword(cur().text);
  }

  bool starts_expression(std::size_t ahead = 0) const {
    const Token& t = *peek(ahead).t;
    switch (t.kind) {
      case TokenKind::Number:
      case TokenKind::String: return true;
      case TokenKind::Name:
        if (!is_keyword(t.text)) return true;
        return t.text == "True" || t.text == "False" || t.text == "None" ||
               t.text == "not" || t.text == "lambda" || t.text == "await";
      case TokenKind::Op:
        return t.text == "(" || t.text == "[" || t.text == "{" || t.text == "-" ||
               t.text == "+" || t.text == "~" || t.text == "..." || t.text == "*";
      default: return false;
    }
  }

  static ExprPtr make(ExprKind k, Pos begin, Pos end) {
    return std::make_unique<Expr>(k, Span{begin, end});
  }

  // ---- statements --------------------------------------------------------

  void statement(Block& out) {
    const Token& t = cur();
    if (t.kind == TokenKind::Indent) fail_at("unexpected indent", t.end);
    if (t.kind == TokenKind::Dedent) fail_here("unindent does not match any outer indentation level");
    if (t.kind == TokenKind::Newline) {
      advance();
      return;
    }
    if (t.kind == TokenKind::Op && t.text == "@") {
      out.push_back(decorated());
      return;
    }
    if (t.kind == TokenKind::Name) {
      std::string_view w = t.text;
      if (w == "def") return out.push_back(function_def({}, t.begin, false));
      if (w == "class") return out.push_back(class_def({}, t.begin));
      if (w == "if") return out.push_back(if_stmt());
      if (w == "while") return out.push_back(while_stmt());
      if (w == "for") return out.push_back(for_stmt(t.begin, false));
      if (w == "try") return out.push_back(try_stmt());
      if (w == "with") return out.push_back(with_stmt(t.begin, false));
      if (w == "async") {
        Pos begin = t.begin;
        advance();
        if (at_keyword("def")) return out.push_back(function_def({}, begin, true));
        if (at_keyword("for")) return out.push_back(for_stmt(begin, true));
        if (at_keyword("with")) return out.push_back(with_stmt(begin, true));
        fail_here("invalid syntax");
      }
      if (w == "match") {
        if (StmtPtr m = try_match_stmt()) return out.push_back(std::move(m));
      }
    }
    simple_statements(out);
  }

  void simple_statements(Block& out) {
    for (;;) {
      out.push_back(simple_statement());
      if (accept_op(";")) {
        if (cur().kind == TokenKind::Newline || cur().kind == TokenKind::EndMarker) {
          semicolon_end_[out.back().get()] = last_end();
          break;
        }
        continue;
      }
      break;
    }
    if (cur().kind == TokenKind::Newline) {
      advance();
      return;
    }
    if (cur().kind == TokenKind::EndMarker) return;
    fail_here("invalid syntax");
  }

  Block block() {
    Block body;
    if (cur().kind == TokenKind::Newline) {
      advance();
      if (cur().kind != TokenKind::Indent) fail_here("expected an indented block");
      advance();
      while (cur().kind != TokenKind::Dedent && cur().kind != TokenKind::EndMarker) {
        statement(body);
      }
      if (cur().kind == TokenKind::Dedent) advance();
    } else {
      simple_statements(body);
    }
    return body;
  }

  // A block ends after a trailing semicolon on its last line.
  Pos block_end(const Block& b) const {
    auto it = semicolon_end_.find(b.back().get());
    return it == semicolon_end_.end() ? b.back()->span.end : it->second;
  }

  StmtPtr simple_statement() {
    const Token& t = cur();
    Pos begin = t.begin;
    auto finish = [&](StmtPtr s) {
      s->span = {begin, last_end()};
      return s;
    };
    if (t.kind == TokenKind::Name) {
      std::string_view w = t.text;
      if (w == "pass" || w == "break" || w == "continue") {
        advance();
        StmtKind k = w == "pass" ? StmtKind::Pass : w == "break" ? StmtKind::Break : StmtKind::Continue;
        return finish(std::make_unique<Stmt>(k));
      }
      if (w == "return") {
        advance();
        auto s = std::make_unique<Stmt>(StmtKind::Return);
        if (starts_expression()) s->value = star_expressions();
        return finish(std::move(s));
      }
      if (w == "raise") {
        advance();
        auto s = std::make_unique<Stmt>(StmtKind::Raise);
        if (starts_expression()) {
          s->value = expression();
          if (accept_keyword("from")) s->annotation = expression();
        }
        return finish(std::move(s));
      }
      if (w == "global" || w == "nonlocal") {
        advance();
        auto s = std::make_unique<Stmt>(w == "global" ? StmtKind::Global : StmtKind::Nonlocal);
        do {
          s->identifiers.push_back(identifier());
        } while (accept_op(","));
        return finish(std::move(s));
      }
      if (w == "del") {
        advance();
        auto s = std::make_unique<Stmt>(StmtKind::Delete);
        do {
          if (!starts_expression()) break;
          ExprPtr target = bitwise_or();
          check_target(*target, true);
          s->targets.push_back(std::move(target));
        } while (accept_op(","));
        if (s->targets.empty()) fail_here("invalid syntax");
        return finish(std::move(s));
      }
      if (w == "assert") {
        advance();
        auto s = std::make_unique<Stmt>(StmtKind::Assert);
        s->value = expression();
        if (accept_op(",")) s->annotation = expression();
        return finish(std::move(s));
      }
      if (w == "import") return finish(import_stmt());
      if (w == "from") return finish(import_from_stmt());
    }
    return finish(expression_statement());
  }

  StmtPtr import_stmt() {
    advance();
    auto s = std::make_unique<Stmt>(StmtKind::Import);
    do {
      Alias a;
      a.span.begin = cur().begin;
      a.name = dotted_name();
      if (accept_keyword("as")) a.asname = identifier();
      a.span.end = last_end();
      s->names.push_back(std::move(a));
    } while (accept_op(","));
    return s;
  }

  std::string dotted_name() {
    std::string name = identifier();
    while (at_op(".")) {
      advance();
      name += "." + identifier();
    }
    return name;
  }

  StmtPtr import_from_stmt() {
    advance();
    auto s = std::make_unique<Stmt>(StmtKind::ImportFrom);
    for (;;) {
      if (accept_op(".")) {
        s->level += 1;
      } else if (accept_op("...")) {
        s->level += 3;
      } else {
        break;
      }
    }
    if (!at_keyword("import")) s->module = dotted_name();
    if (s->module.empty() && s->level == 0) fail_here("invalid syntax");
    expect_keyword("import");
    if (at_op("*")) {
      Alias a;
      a.span = {cur().begin, cur().end};
      a.name = "*";
      advance();
      s->names.push_back(std::move(a));
      return s;
    }
    bool parens = accept_op("(");
    do {
      if (parens && at_op(")")) break;
      Alias a;
      a.span.begin = cur().begin;
      a.name = identifier();
      if (accept_keyword("as")) a.asname = identifier();
      a.span.end = last_end();
      s->names.push_back(std::move(a));
    } while (accept_op(","));
    if (parens) expect_op(")");
    if (s->names.empty()) fail_here("invalid syntax");
    if (!parens && at_op(",")) fail_here("trailing comma not allowed without surrounding parentheses");
    return s;
  }

  ExprPtr yield_or_star_expressions() {
    if (at_keyword("yield")) return yield_expression();
    return star_expressions();
  }

  StmtPtr expression_statement() {
    ExprPtr first = yield_or_star_expressions();
    if (at_op("=")) {
      auto s = std::make_unique<Stmt>(StmtKind::Assign);
      ExprPtr rhs = std::move(first);
      while (accept_op("=")) {
        check_target(*rhs, false);
        s->targets.push_back(std::move(rhs));
        rhs = yield_or_star_expressions();
      }
      s->value = std::move(rhs);
      return s;
    }
    for (std::string_view op : kAugmentedOps) {
      if (!at_op(op)) continue;
      advance();
      if (first->kind != ExprKind::Name && first->kind != ExprKind::Attribute &&
          first->kind != ExprKind::Subscript) {
        fail_at("'" + describe(*first) + "' is an illegal expression for augmented assignment",
                first->span.begin);
      }
      auto s = std::make_unique<Stmt>(StmtKind::AugAssign);
      s->op = std::string(op);
      s->targets.push_back(std::move(first));
      s->value = yield_or_star_expressions();
      return s;
    }
    if (at_op(":")) {
      advance();
      if (first->kind == ExprKind::Tuple) {
        fail_at("only single target (not tuple) can be annotated", first->span.begin);
      }
      if (first->kind == ExprKind::List) {
        fail_at("only single target (not list) can be annotated", first->span.begin);
      }
      if (first->kind != ExprKind::Name && first->kind != ExprKind::Attribute &&
          first->kind != ExprKind::Subscript) {
        fail_at("illegal target for annotation", first->span.begin);
      }
      auto s = std::make_unique<Stmt>(StmtKind::AnnAssign);
      s->targets.push_back(std::move(first));
      s->annotation = expression();
      if (accept_op("=")) s->value = yield_or_star_expressions();
      return s;
    }
    auto s = std::make_unique<Stmt>(StmtKind::Expr);
    s->value = std::move(first);
    return s;
  }

  void check_target(const Expr& e, bool for_delete) {
    switch (e.kind) {
      case ExprKind::Name:
      case ExprKind::Attribute:
      case ExprKind::Subscript: return;
      case ExprKind::Starred:
        if (for_delete) fail_at("cannot delete starred", e.span.begin);
        check_target(*e.children[0], for_delete);
        return;
      case ExprKind::Tuple:
      case ExprKind::List:
        for (const auto& c : e.children) check_target(*c, for_delete);
        return;
      default:
        fail_at(std::string(for_delete ? "cannot delete " : "cannot assign to ") + describe(e),
                e.span.begin);
    }
  }

  StmtPtr decorated() {
    Pos begin = cur().begin;
    std::vector<ExprPtr> decorators;
    while (accept_op("@")) {
      decorators.push_back(named_expression());
      if (cur().kind != TokenKind::Newline) fail_here("invalid syntax");
      advance();
    }
    if (at_keyword("def")) return function_def(std::move(decorators), begin, false);
    if (at_keyword("class")) return class_def(std::move(decorators), begin);
    if (accept_keyword("async")) {
      if (at_keyword("def")) return function_def(std::move(decorators), begin, true);
    }
    fail_here("invalid syntax");
  }

  StmtPtr function_def(std::vector<ExprPtr> decorators, Pos begin, bool is_async) {
    expect_keyword("def");
    auto s = std::make_unique<Stmt>(StmtKind::FunctionDef);
    s->is_async = is_async;
    s->decorators = std::move(decorators);
    s->name = identifier();
    expect_op("(");
    s->params = parameters(")", true);
    expect_op(")");
    if (accept_op("->")) s->annotation = expression();
    expect_op(":");
    s->body = block();
    s->span = {begin, block_end(s->body)};
    return s;
  }

  std::unique_ptr<Parameters> parameters(std::string_view close, bool annotations) {
    auto ps = std::make_unique<Parameters>();
    bool seen_star = false;
    bool seen_kwargs = false;
    bool seen_default = false;
    while (!at_op(close)) {
      if (seen_kwargs) fail_here("arguments cannot follow var-keyword argument");
      Pos begin = cur().begin;
      if (accept_op("/")) {
        if (seen_star || ps->params.empty()) fail_at("invalid syntax", begin);
        for (auto& p : ps->params) {
          if (p.kind == ParamKind::PositionalOnly) fail_at("/ may appear only once", begin);
          p.kind = ParamKind::PositionalOnly;
        }
        if (!accept_op(",")) break;
        continue;
      }
      Param p;
      if (accept_op("**")) {
        p.kind = ParamKind::VarKeywords;
        seen_kwargs = true;
      } else if (accept_op("*")) {
        if (seen_star) fail_at("* argument may appear only once", begin);
        seen_star = true;
        if (at_op(",") || at_op(close)) {
          if (at_op(close)) fail_here("named arguments must follow bare *");
          advance();
          continue;
        }
        p.kind = ParamKind::VarArgs;
      } else {
        p.kind = seen_star ? ParamKind::KeywordOnly : ParamKind::Normal;
      }
      p.name = identifier();
      if (annotations && accept_op(":")) p.annotation = expression();
      if (accept_op("=")) {
        if (p.kind == ParamKind::VarArgs || p.kind == ParamKind::VarKeywords) {
          fail_here("var-positional argument cannot have default value");
        }
        p.default_value = expression();
        if (p.kind == ParamKind::Normal) seen_default = true;
      } else if (p.kind == ParamKind::Normal && seen_default) {
        fail_at("non-default argument follows default argument", begin);
      }
      p.span = {begin, last_end()};
      for (const auto& other : ps->params) {
        if (other.name == p.name) {
          fail_at("duplicate argument '" + p.name + "' in function definition", begin);
        }
      }
      ps->params.push_back(std::move(p));
      if (!accept_op(",")) break;
    }
    return ps;
  }

  StmtPtr class_def(std::vector<ExprPtr> decorators, Pos begin) {
    expect_keyword("class");
    auto s = std::make_unique<Stmt>(StmtKind::ClassDef);
    s->decorators = std::move(decorators);
    s->name = identifier();
    if (accept_op("(")) {
      s->bases = call_arguments();
      expect_op(")");
    }
    expect_op(":");
    s->body = block();
    s->span = {begin, block_end(s->body)};
    return s;
  }

  StmtPtr if_stmt() {
    Pos begin = cur().begin;
    advance();  // `if` or `elif`
    auto s = std::make_unique<Stmt>(StmtKind::If);
    s->value = named_expression();
    expect_op(":");
    s->body = block();
    Pos end = block_end(s->body);
    if (at_keyword("elif")) {
      s->orelse.push_back(if_stmt());
      end = block_end(s->orelse);
    } else if (accept_keyword("else")) {
      expect_op(":");
      s->orelse = block();
      end = block_end(s->orelse);
    }
    s->span = {begin, end};
    return s;
  }

  StmtPtr while_stmt() {
    Pos begin = cur().begin;
    advance();
    auto s = std::make_unique<Stmt>(StmtKind::While);
    s->value = named_expression();
    expect_op(":");
    s->body = block();
    Pos end = block_end(s->body);
    if (accept_keyword("else")) {
      expect_op(":");
      s->orelse = block();
      end = block_end(s->orelse);
    }
    s->span = {begin, end};
    return s;
  }

  // Comma-separated assignment targets, stopping before `in`.
  ExprPtr target_list() {
    Pos begin = cur().begin;
    std::vector<ExprPtr> items;
    bool trailing_comma = false;
    for (;;) {
      ExprPtr t;
      if (at_op("*")) {
        Pos sb = cur().begin;
        advance();
        auto inner = bitwise_or();
        t = make(ExprKind::Starred, sb, inner->span.end);
        t->children.push_back(std::move(inner));
      } else {
        t = bitwise_or();
      }
      items.push_back(std::move(t));
      trailing_comma = false;
      if (!accept_op(",")) break;
      trailing_comma = true;
      if (at_keyword("in") || !starts_expression()) break;
    }
    ExprPtr result;
    if (items.size() == 1 && !trailing_comma) {
      result = std::move(items[0]);
    } else {
      result = make(ExprKind::Tuple, begin, last_end());
      result->children = std::move(items);
    }
    check_target(*result, false);
    return result;
  }

  StmtPtr for_stmt(Pos begin, bool is_async) {
    expect_keyword("for");
    auto s = std::make_unique<Stmt>(StmtKind::For);
    s->is_async = is_async;
    s->targets.push_back(target_list());
    expect_keyword("in");
    s->value = star_expressions();
    expect_op(":");
    s->body = block();
    Pos end = block_end(s->body);
    if (accept_keyword("else")) {
      expect_op(":");
      s->orelse = block();
      end = block_end(s->orelse);
    }
    s->span = {begin, end};
    return s;
  }

  StmtPtr try_stmt() {
    Pos begin = cur().begin;
    advance();
    expect_op(":");
    auto s = std::make_unique<Stmt>(StmtKind::Try);
    s->body = block();
    Pos end = block_end(s->body);
    bool bare_seen = false;
    while (at_keyword("except")) {
      ExceptHandler h;
      h.span.begin = cur().begin;
      advance();
      if (accept_op("*")) s->is_star = true;
      if (bare_seen) fail_at("default 'except:' must be last", h.span.begin);
      if (!at_op(":")) {
        h.type = expression();
        if (at_op(",")) fail_here("multiple exception types must be parenthesized");
        if (accept_keyword("as")) h.name = identifier();
      } else {
        bare_seen = true;
      }
      expect_op(":");
      h.body = block();
      h.span.end = block_end(h.body);
      end = h.span.end;
      s->handlers.push_back(std::move(h));
    }
    if (accept_keyword("else")) {
      if (s->handlers.empty()) fail_here("invalid syntax");
      expect_op(":");
      s->orelse = block();
      end = block_end(s->orelse);
    }
    if (accept_keyword("finally")) {
      expect_op(":");
      s->finalbody = block();
      end = block_end(s->finalbody);
    }
    if (s->handlers.empty() && s->finalbody.empty()) fail_here("expected 'except' or 'finally' block");
    s->span = {begin, end};
    return s;
  }

  WithItem with_item() {
    WithItem item;
    item.context = expression();
    if (accept_keyword("as")) {
      item.var = target_atom();
    }
    return item;
  }

  // A single `as` target of a with-item: stops before `,`, `)` and `:`.
  ExprPtr target_atom() {
    ExprPtr t = bitwise_or();
    check_target(*t, false);
    return t;
  }

  StmtPtr with_stmt(Pos begin, bool is_async) {
    expect_keyword("with");
    auto s = std::make_unique<Stmt>(StmtKind::With);
    s->is_async = is_async;
    bool parsed = false;
    if (at_op("(")) {
      std::size_t save = i_;
      try {
        advance();
        std::vector<WithItem> items;
        while (!at_op(")")) {
          items.push_back(with_item());
          if (!accept_op(",")) break;
        }
        expect_op(")");
        if (!at_op(":") || items.empty()) throw SyntaxError("not a parenthesized with", cur().begin);
        s->items = std::move(items);
        parsed = true;
      } catch (const SyntaxError&) {
        i_ = save;
      }
    }
    if (!parsed) {
      do {
        s->items.push_back(with_item());
      } while (accept_op(","));
    }
    expect_op(":");
    s->body = block();
    s->span = {begin, block_end(s->body)};
    return s;
  }

  // ---- match statement ---------------------------------------------------

  StmtPtr try_match_stmt() {
    std::size_t save = i_;
    Pos begin = cur().begin;
    ExprPtr subject;
    try {
      advance();  // `match`
      if (!starts_expression()) throw SyntaxError("", begin);
      subject = star_named_expressions_subject();
      if (!at_op(":")) throw SyntaxError("", begin);
      advance();
      if (cur().kind != TokenKind::Newline) throw SyntaxError("", begin);
      advance();
      if (cur().kind != TokenKind::Indent) throw SyntaxError("", begin);
      advance();
      if (!at_keyword("case")) throw SyntaxError("", begin);
    } catch (const SyntaxError&) {
      i_ = save;
      return nullptr;
    }
    auto s = std::make_unique<Stmt>(StmtKind::Match);
    s->value = std::move(subject);
    while (at_keyword("case")) {
      MatchCase c;
      c.span.begin = cur().begin;
      advance();
      c.pattern = patterns();
      if (accept_keyword("if")) c.guard = named_expression();
      expect_op(":");
      c.body = block();
      c.span.end = block_end(c.body);
      s->cases.push_back(std::move(c));
    }
    if (cur().kind != TokenKind::Dedent) fail_here("invalid syntax");
    advance();
    s->span = {begin, s->cases.back().span.end};
    return s;
  }

  ExprPtr star_named_expressions_subject() {
    Pos begin = cur().begin;
    ExprPtr first = star_named_expression();
    if (!at_op(",")) return first;
    auto tuple = make(ExprKind::Tuple, begin, begin);
    tuple->children.push_back(std::move(first));
    while (accept_op(",")) {
      if (!starts_expression()) break;
      tuple->children.push_back(star_named_expression());
    }
    tuple->span.end = last_end();
    return tuple;
  }

  ExprPtr patterns() {
    Pos begin = cur().begin;
    ExprPtr first = maybe_star_pattern();
    if (!at_op(",")) {
      if (first->kind == ExprKind::MatchStar) {
        auto seq = make(ExprKind::MatchSequence, begin, last_end());
        seq->children.push_back(std::move(first));
        return seq;
      }
      return first;
    }
    auto seq = make(ExprKind::MatchSequence, begin, begin);
    seq->children.push_back(std::move(first));
    while (accept_op(",")) {
      if (at_op(":") || at_keyword("if")) break;
      seq->children.push_back(maybe_star_pattern());
    }
    seq->span.end = last_end();
    return seq;
  }

  ExprPtr maybe_star_pattern() {
    if (at_op("*")) {
      Pos begin = cur().begin;
      advance();
      std::string name = identifier();
      auto star = make(ExprKind::MatchStar, begin, last_end());
      star->id = name == "_" ? "" : name;
      return star;
    }
    return pattern();
  }

  ExprPtr pattern() {
    Pos begin = cur().begin;
    ExprPtr p = or_pattern();
    if (accept_keyword("as")) {
      std::string name = identifier();
      if (name == "_") fail_here("cannot use '_' as a target");
      auto cap = make(ExprKind::MatchCapture, begin, last_end());
      cap->id = name;
      cap->children.push_back(std::move(p));
      return cap;
    }
    return p;
  }

  ExprPtr or_pattern() {
    Pos begin = cur().begin;
    ExprPtr first = closed_pattern();
    if (!at_op("|")) return first;
    auto alt = make(ExprKind::MatchOr, begin, begin);
    alt->children.push_back(std::move(first));
    while (accept_op("|")) alt->children.push_back(closed_pattern());
    alt->span.end = last_end();
    return alt;
  }

  ExprPtr closed_pattern() {
    Pos begin = cur().begin;
    const Token& t = cur();
    auto value_pattern = [&](ExprPtr v) {
      auto p = make(ExprKind::MatchValue, v->span.begin, v->span.end);
      p->children.push_back(std::move(v));
      return p;
    };
    if (t.kind == TokenKind::Number || t.kind == TokenKind::String || t.is_op("-")) {
      return value_pattern(literal_pattern_value());
    }
    if (t.is_name("None") || t.is_name("True") || t.is_name("False")) {
      advance();
      auto c = make(ExprKind::Constant, begin, last_end());
      c->id = std::string(t.text);
      return value_pattern(std::move(c));
    }
    if (t.kind == TokenKind::Name && !is_keyword(t.text)) {
      std::string name = identifier();
      if (!at_op(".") && !at_op("(")) {
        if (name == "_") return make(ExprKind::MatchWildcard, begin, last_end());
        auto cap = make(ExprKind::MatchCapture, begin, last_end());
        cap->id = name;
        return cap;
      }
      ExprPtr value = make(ExprKind::Name, begin, last_end());
      value->id = name;
      while (accept_op(".")) {
        std::string attr = identifier();
        auto a = make(ExprKind::Attribute, begin, last_end());
        a->id = attr;
        a->children.push_back(std::move(value));
        value = std::move(a);
      }
      if (!at_op("(")) return value_pattern(std::move(value));
      advance();
      auto cls = make(ExprKind::MatchClass, begin, begin);
      cls->children.push_back(std::move(value));
      bool keywords = false;
      while (!at_op(")")) {
        if (at_identifier() && peek(1).is_op("=")) {
          Pos kb = cur().begin;
          auto kw = make(ExprKind::MatchKeyword, kb, kb);
          kw->id = identifier();
          advance();
          kw->children.push_back(pattern());
          kw->span.end = last_end();
          cls->children.push_back(std::move(kw));
          keywords = true;
        } else {
          if (keywords) fail_here("positional patterns follow keyword patterns");
          cls->children.push_back(pattern());
        }
        if (!accept_op(",")) break;
      }
      expect_op(")");
      cls->span.end = last_end();
      return cls;
    }
    if (t.is_op("(") || t.is_op("[")) {
      bool paren = t.is_op("(");
      std::string_view close = paren ? ")" : "]";
      advance();
      auto seq = make(ExprKind::MatchSequence, begin, begin);
      bool comma = false;
      while (!at_op(close)) {
        seq->children.push_back(maybe_star_pattern());
        if (!accept_op(",")) break;
        comma = true;
      }
      expect_op(close);
      seq->span.end = last_end();
      if (paren && !comma && seq->children.size() == 1 &&
          seq->children[0]->kind != ExprKind::MatchStar) {
        return std::move(seq->children[0]);
      }
      return seq;
    }
    if (t.is_op("{")) {
      advance();
      auto map = make(ExprKind::MatchMapping, begin, begin);
      while (!at_op("}")) {
        if (accept_op("**")) {
          map->id = identifier();
          accept_op(",");
          break;
        }
        ExprPtr key;
        if (at_identifier()) {
          Pos kb = cur().begin;
          key = make(ExprKind::Name, kb, kb);
          key->id = identifier();
          while (accept_op(".")) {
            auto a = make(ExprKind::Attribute, kb, kb);
            a->id = identifier();
            a->children.push_back(std::move(key));
            a->span.end = last_end();
            key = std::move(a);
          }
          key->span.end = last_end();
        } else if (at_keyword("None") || at_keyword("True") || at_keyword("False")) {
          key = make(ExprKind::Constant, cur().begin, cur().end);
          key->id = std::string(cur().text);
          advance();
        } else {
          key = literal_pattern_value();
        }
        expect_op(":");
        map->children.push_back(std::move(key));
        map->children.push_back(pattern());
        if (!accept_op(",")) break;
      }
      expect_op("}");
      map->span.end = last_end();
      return map;
    }
    fail_here("invalid syntax");
  }

  // Signed numbers, complex literals like `1+2j`, and strings.
  ExprPtr literal_pattern_value() {
    Pos begin = cur().begin;
    if (cur().kind == TokenKind::String) return strings();
    ExprPtr value;
    if (accept_op("-")) {
      if (cur().kind != TokenKind::Number) fail_here("invalid syntax");
      auto num = atom();
      value = make(ExprKind::UnaryOp, begin, last_end());
      value->id = "-";
      value->children.push_back(std::move(num));
    } else {
      if (cur().kind != TokenKind::Number) fail_here("invalid syntax");
      value = atom();
    }
    if (at_op("+") || at_op("-")) {
      std::string op(cur().text);
      advance();
      if (cur().kind != TokenKind::Number) fail_here("invalid syntax");
      auto rhs = atom();
      auto bin = make(ExprKind::BinOp, begin, last_end());
      bin->id = op;
      bin->children.push_back(std::move(value));
      bin->children.push_back(std::move(rhs));
      value = std::move(bin);
    }
    return value;
  }

  // ---- expressions -------------------------------------------------------

  ExprPtr star_expressions() {
    Pos begin = cur().begin;
    ExprPtr first = star_expression();
    if (!at_op(",")) return first;
    auto tuple = make(ExprKind::Tuple, begin, begin);
    tuple->children.push_back(std::move(first));
    while (accept_op(",")) {
      if (!starts_expression()) break;
      tuple->children.push_back(star_expression());
    }
    tuple->span.end = last_end();
    return tuple;
  }

  // Call arguments allow `*a or b`; other starred positions stop at `|`.
  ExprPtr star_expression(bool call_argument = false) {
    if (at_op("*")) {
      Pos begin = cur().begin;
      advance();
      auto inner = call_argument ? expression() : bitwise_or();
      auto s = make(ExprKind::Starred, begin, inner->span.end);
      s->children.push_back(std::move(inner));
      return s;
    }
    return expression();
  }

  ExprPtr star_named_expression() {
    if (at_op("*")) return star_expression();
    return named_expression();
  }

  ExprPtr named_expression() {
    if (at_identifier() && peek(1).is_op(":=")) {
      Pos begin = cur().begin;
      auto target = make(ExprKind::Name, begin, cur().end);
      target->id = std::string(cur().text);
      advance();
      advance();
      auto value = expression();
      auto n = make(ExprKind::NamedExpr, begin, value->span.end);
      n->children.push_back(std::move(target));
      n->children.push_back(std::move(value));
      return n;
    }
    ExprPtr e = expression();
    if (at_op(":=")) fail_at("cannot use assignment expressions with " + describe(*e), e->span.begin);
    return e;
  }

  ExprPtr expression() {
    if (at_keyword("lambda")) return lambda();
    Pos begin = cur().begin;
    ExprPtr body = disjunction();
    if (!at_keyword("if")) return body;
    advance();
    ExprPtr test = disjunction();
    expect_keyword("else");
    ExprPtr orelse = expression();
    auto e = make(ExprKind::IfExp, begin, orelse->span.end);
    e->children.push_back(std::move(body));
    e->children.push_back(std::move(test));
    e->children.push_back(std::move(orelse));
    return e;
  }

  ExprPtr lambda() {
    Pos begin = cur().begin;
    advance();
    auto e = make(ExprKind::Lambda, begin, begin);
    e->params = parameters(":", false);
    expect_op(":");
    e->children.push_back(expression());
    e->span.end = last_end();
    return e;
  }

  ExprPtr bool_chain(std::string_view op, ExprPtr (Parser::*operand)()) {
    Pos begin = cur().begin;
    ExprPtr first = (this->*operand)();
    if (!at_keyword(op)) return first;
    auto e = make(ExprKind::BoolOp, begin, begin);
    e->id = std::string(op);
    e->children.push_back(std::move(first));
    while (accept_keyword(op)) e->children.push_back((this->*operand)());
    e->span.end = last_end();
    return e;
  }

  ExprPtr disjunction() { return bool_chain("or", &Parser::conjunction); }
  ExprPtr conjunction() { return bool_chain("and", &Parser::inversion); }

  ExprPtr inversion() {
    if (at_keyword("not")) {
      Pos begin = cur().begin;
      advance();
      auto operand = inversion();
      auto e = make(ExprKind::UnaryOp, begin, operand->span.end);
      e->id = "not";
      e->children.push_back(std::move(operand));
      return e;
    }
    return comparison();
  }

  std::string comparison_operator() {
    const Token& t = cur();
    if (t.kind == TokenKind::Op) {
      for (std::string_view op : {"==", "!=", "<", "<=", ">", ">="}) {
        if (t.text == op) {
          advance();
          return std::string(op);
        }
      }
      return {};
    }
    if (t.is_name("in")) {
      advance();
      return "in";
    }
    if (t.is_name("not") && peek(1).is_name("in")) {
      advance();
      advance();
      return "not in";
    }
    if (t.is_name("is")) {
      advance();
      if (accept_keyword("not")) return "is not";
      return "is";
    }
    return {};
  }

  ExprPtr comparison() {
    Pos begin = cur().begin;
    ExprPtr first = bitwise_or();
    std::string op = comparison_operator();
    if (op.empty()) return first;
    auto e = make(ExprKind::Compare, begin, begin);
    e->children.push_back(std::move(first));
    while (!op.empty()) {
      e->ops.push_back(op);
      e->children.push_back(bitwise_or());
      op = comparison_operator();
    }
    e->span.end = last_end();
    return e;
  }

  ExprPtr binary(std::initializer_list<std::string_view> ops, ExprPtr (Parser::*operand)()) {
    Pos begin = cur().begin;
    ExprPtr left = (this->*operand)();
    for (;;) {
      std::string_view matched;
      for (std::string_view op : ops) {
        if (at_op(op)) matched = op;
      }
      if (matched.empty()) return left;
      advance();
      ExprPtr right = (this->*operand)();
      auto e = make(ExprKind::BinOp, begin, right->span.end);
      e->id = std::string(matched);
      e->children.push_back(std::move(left));
      e->children.push_back(std::move(right));
      left = std::move(e);
    }
  }

  ExprPtr bitwise_or() { return binary({"|"}, &Parser::bitwise_xor); }
  ExprPtr bitwise_xor() { return binary({"^"}, &Parser::bitwise_and); }
  ExprPtr bitwise_and() { return binary({"&"}, &Parser::shift_expr); }
  ExprPtr shift_expr() { return binary({"<<", ">>"}, &Parser::sum); }
  ExprPtr sum() { return binary({"+", "-"}, &Parser::term); }
  ExprPtr term() { return binary({"*", "/", "//", "%", "@"}, &Parser::factor); }

  ExprPtr factor() {
    if (at_op("+") || at_op("-") || at_op("~")) {
      Pos begin = cur().begin;
      std::string op(cur().text);
      advance();
      auto operand = factor();
      auto e = make(ExprKind::UnaryOp, begin, operand->span.end);
      e->id = op;
      e->children.push_back(std::move(operand));
      return e;
    }
    return power();
  }

  ExprPtr power() {
    Pos begin = cur().begin;
    ExprPtr base = await_primary();
    if (!at_op("**")) return base;
    advance();
    ExprPtr exponent = factor();
    auto e = make(ExprKind::BinOp, begin, exponent->span.end);
    e->id = "**";
    e->children.push_back(std::move(base));
    e->children.push_back(std::move(exponent));
    return e;
  }

  ExprPtr await_primary() {
    if (at_keyword("await")) {
      Pos begin = cur().begin;
      advance();
      auto operand = primary();
      auto e = make(ExprKind::Await, begin, operand->span.end);
      e->children.push_back(std::move(operand));
      return e;
    }
    return primary();
  }

  ExprPtr primary() {
    Pos begin = cur().begin;
    ExprPtr e = atom();
    for (;;) {
      if (accept_op(".")) {
        auto a = make(ExprKind::Attribute, begin, begin);
        a->id = identifier();
        a->children.push_back(std::move(e));
        a->span.end = last_end();
        e = std::move(a);
      } else if (accept_op("(")) {
        auto c = make(ExprKind::Call, begin, begin);
        c->children.push_back(std::move(e));
        for (auto& arg : call_arguments()) c->children.push_back(std::move(arg));
        expect_op(")");
        c->span.end = last_end();
        e = std::move(c);
      } else if (accept_op("[")) {
        auto s = make(ExprKind::Subscript, begin, begin);
        s->children.push_back(std::move(e));
        s->children.push_back(slices());
        expect_op("]");
        s->span.end = last_end();
        e = std::move(s);
      } else {
        return e;
      }
    }
  }

  std::vector<ExprPtr> call_arguments() {
    std::vector<ExprPtr> args;
    bool seen_keyword = false;
    bool seen_double_star = false;
    while (!at_op(")")) {
      Pos begin = cur().begin;
      if (accept_op("**")) {
        auto kw = make(ExprKind::Keyword, begin, begin);
        kw->children.push_back(expression());
        kw->span.end = last_end();
        args.push_back(std::move(kw));
        seen_double_star = true;
      } else if (at_op("*")) {
        if (seen_double_star) fail_here("iterable argument unpacking follows keyword argument unpacking");
        args.push_back(star_expression(true));
      } else if (at_identifier() && peek(1).is_op("=")) {
        auto kw = make(ExprKind::Keyword, begin, begin);
        kw->id = identifier();
        advance();
        kw->children.push_back(expression());
        kw->span.end = last_end();
        args.push_back(std::move(kw));
        seen_keyword = true;
      } else {
        ExprPtr value = named_expression();
        if (at_op("=")) fail_here("expression cannot contain assignment, perhaps you meant \"==\"?");
        if (at_keyword("for") || (at_keyword("async") && peek(1).is_name("for"))) {
          value = comprehension(ExprKind::GeneratorExp, std::move(value), begin);
          if (!args.empty() || !at_op(")")) {
            fail_at("Generator expression must be parenthesized", begin);
          }
        }
        if (seen_double_star) {
          fail_at("positional argument follows keyword argument unpacking", begin);
        }
        if (seen_keyword) fail_at("positional argument follows keyword argument", begin);
        args.push_back(std::move(value));
      }
      if (!accept_op(",")) break;
    }
    return args;
  }

  ExprPtr slices() {
    Pos begin = cur().begin;
    ExprPtr first = slice();
    if (!at_op(",")) return first;
    auto tuple = make(ExprKind::Tuple, begin, begin);
    tuple->children.push_back(std::move(first));
    while (accept_op(",")) {
      if (at_op("]")) break;
      tuple->children.push_back(slice());
    }
    tuple->span.end = last_end();
    return tuple;
  }

  ExprPtr slice() {
    Pos begin = cur().begin;
    ExprPtr lower;
    if (!at_op(":")) {
      if (at_op("*")) return star_expression();
      lower = named_expression();
      if (!at_op(":")) return lower;
    }
    auto s = make(ExprKind::Slice, begin, begin);
    advance();  // ':'
    ExprPtr upper, step;
    if (!at_op(":") && !at_op("]") && !at_op(",")) upper = expression();
    if (accept_op(":")) {
      if (!at_op("]") && !at_op(",")) step = expression();
    }
    s->children.push_back(std::move(lower));
    s->children.push_back(std::move(upper));
    s->children.push_back(std::move(step));
    s->span.end = last_end();
    return s;
  }

  ExprPtr comprehension(ExprKind kind, ExprPtr element, Pos begin, ExprPtr value = nullptr) {
    auto e = make(kind, begin, begin);
    e->children.push_back(std::move(element));
    if (value) e->children.push_back(std::move(value));
    while (at_keyword("for") || (at_keyword("async") && peek(1).is_name("for"))) {
      Comprehension g;
      if (accept_keyword("async")) g.is_async = true;
      expect_keyword("for");
      g.target = target_list();
      expect_keyword("in");
      g.iter = disjunction();
      while (accept_keyword("if")) g.conditions.push_back(disjunction());
      e->generators.push_back(std::move(g));
    }
    e->span.end = last_end();
    return e;
  }

  ExprPtr yield_expression() {
    Pos begin = cur().begin;
    advance();
    if (accept_keyword("from")) {
      auto value = expression();
      auto e = make(ExprKind::YieldFrom, begin, value->span.end);
      e->children.push_back(std::move(value));
      return e;
    }
    auto e = make(ExprKind::Yield, begin, last_end());
    if (starts_expression()) {
      e->children.push_back(star_expressions());
      e->span.end = last_end();
    }
    return e;
  }

  ExprPtr atom() {
    const Token& t = cur();
    Pos begin = t.begin;
    switch (t.kind) {
      case TokenKind::Name: {
        if (t.text == "True" || t.text == "False" || t.text == "None") {
          advance();
          auto c = make(ExprKind::Constant, begin, t.end);
          c->id = std::string(t.text);
          return c;
        }
        if (is_keyword(t.text)) fail_here("invalid syntax");
        advance();
        auto n = make(ExprKind::Name, begin, t.end);
        n->id = std::string(t.text);
        return n;
      }
      case TokenKind::Number: {
        advance();
        auto c = make(ExprKind::Constant, begin, t.end);
        c->id = "num";
        return c;
      }
      case TokenKind::String: return strings();
      case TokenKind::Op: break;
      default: fail_here("invalid syntax");
    }
    if (t.text == "...") {
      advance();
      auto c = make(ExprKind::Constant, begin, t.end);
      c->id = "Ellipsis";
      return c;
    }
    if (t.text == "(") return paren_atom();
    if (t.text == "[") return list_atom();
    if (t.text == "{") return brace_atom();
    fail_here("invalid syntax");
  }

  ExprPtr paren_atom() {
    Pos begin = cur().begin;
    advance();
    if (accept_op(")")) return make(ExprKind::Tuple, begin, last_end());
    if (at_keyword("yield")) {
      auto y = yield_expression();
      expect_op(")");
      return y;
    }
    ExprPtr first = star_named_expression();
    if (at_keyword("for") || (at_keyword("async") && peek(1).is_name("for"))) {
      auto g = comprehension(ExprKind::GeneratorExp, std::move(first), begin);
      expect_op(")");
      g->span.end = last_end();
      return g;
    }
    if (accept_op(")")) {
      if (first->kind == ExprKind::Starred) fail_at("cannot use starred expression here", first->span.begin);
      return first;
    }
    auto tuple = make(ExprKind::Tuple, begin, begin);
    tuple->children.push_back(std::move(first));
    while (accept_op(",")) {
      if (at_op(")")) break;
      tuple->children.push_back(star_named_expression());
    }
    expect_op(")");
    tuple->span.end = last_end();
    return tuple;
  }

  ExprPtr list_atom() {
    Pos begin = cur().begin;
    advance();
    auto list = make(ExprKind::List, begin, begin);
    if (!at_op("]")) {
      ExprPtr first = star_named_expression();
      if (at_keyword("for") || (at_keyword("async") && peek(1).is_name("for"))) {
        auto c = comprehension(ExprKind::ListComp, std::move(first), begin);
        expect_op("]");
        c->span.end = last_end();
        return c;
      }
      list->children.push_back(std::move(first));
      while (accept_op(",")) {
        if (at_op("]")) break;
        list->children.push_back(star_named_expression());
      }
    }
    expect_op("]");
    list->span.end = last_end();
    return list;
  }

  ExprPtr brace_atom() {
    Pos begin = cur().begin;
    advance();
    if (accept_op("}")) return make(ExprKind::Dict, begin, last_end());
    // Dict when the first item is `k: v` or `**m`, set otherwise.
    if (accept_op("**")) {
      auto dict = make(ExprKind::Dict, begin, begin);
      dict->children.push_back(nullptr);
      dict->children.push_back(bitwise_or());
      return dict_rest(std::move(dict));
    }
    ExprPtr first = star_named_expression();
    if (accept_op(":")) {
      ExprPtr value = expression();
      if (at_keyword("for") || (at_keyword("async") && peek(1).is_name("for"))) {
        auto c = comprehension(ExprKind::DictComp, std::move(first), begin, std::move(value));
        expect_op("}");
        c->span.end = last_end();
        return c;
      }
      auto dict = make(ExprKind::Dict, begin, begin);
      dict->children.push_back(std::move(first));
      dict->children.push_back(std::move(value));
      return dict_rest(std::move(dict));
    }
    if (at_keyword("for") || (at_keyword("async") && peek(1).is_name("for"))) {
      auto c = comprehension(ExprKind::SetComp, std::move(first), begin);
      expect_op("}");
      c->span.end = last_end();
      return c;
    }
    auto set = make(ExprKind::Set, begin, begin);
    set->children.push_back(std::move(first));
    while (accept_op(",")) {
      if (at_op("}")) break;
      set->children.push_back(star_named_expression());
    }
    expect_op("}");
    set->span.end = last_end();
    return set;
  }

  ExprPtr dict_rest(ExprPtr dict) {
    while (accept_op(",")) {
      if (at_op("}")) break;
      if (accept_op("**")) {
        dict->children.push_back(nullptr);
        dict->children.push_back(bitwise_or());
        continue;
      }
      dict->children.push_back(expression());
      expect_op(":");
      dict->children.push_back(expression());
    }
    expect_op("}");
    dict->span.end = last_end();
    return dict;
  }

  // Adjacent string literals form one constant. Formatted strings keep their
  // replacement-field expressions as children.
  ExprPtr strings() {
    Pos begin = cur().begin;
    bool any_bytes = false;
    bool any_text = false;
    bool any_fstring = false;
    std::vector<ExprPtr> fields;
    while (cur().kind == TokenKind::String) {
      const Token& t = advance();
      (t.bytes ? any_bytes : any_text) = true;
      if (t.fstring) {
        any_fstring = true;
        formatted_fields(t, fields);
      }
    }
    if (any_bytes && any_text) fail_at("cannot mix bytes and nonbytes literals", begin);
    if (any_fstring) {
      auto e = make(ExprKind::FormattedStr, begin, last_end());
      e->children = std::move(fields);
      return e;
    }
    auto c = make(ExprKind::Constant, begin, last_end());
    c->id = any_bytes ? "bytes" : "str";
    return c;
  }

  static Pos advance_pos(Pos p, std::string_view text) {
    for (char ch : text) {
      if (ch == '\n') {
        ++p.line;
        p.col = 0;
      } else {
        ++p.col;
      }
    }
    return p;
  }

  void formatted_fields(const Token& t, std::vector<ExprPtr>& out) {
    std::string_view text = t.text;
    std::size_t quote = text.find_first_of("'\"");
    char q = text[quote];
    bool triple = text.size() >= quote + 6 && text[quote + 1] == q && text[quote + 2] == q;
    std::size_t body_begin = quote + (triple ? 3 : 1);
    std::size_t body_end = text.size() - (triple ? 3 : 1);
    scan_fields(t, text, body_begin, body_end, out, 0);
  }

  void scan_fields(const Token& t, std::string_view text, std::size_t i, std::size_t end,
                   std::vector<ExprPtr>& out, int nesting) {
    while (i < end) {
      char c = text[i];
      if (c == '\\' && !t.raw) {
        if (i + 1 < end && text[i + 1] == 'N' && i + 2 < end && text[i + 2] == '{') {
          std::size_t close = text.find('}', i + 3);
          i = close == std::string_view::npos ? end : close + 1;
        } else {
          i += 2;
        }
        continue;
      }
      if (c == '{') {
        if (nesting == 0 && i + 1 < end && text[i + 1] == '{') {
          i += 2;
          continue;
        }
        i = replacement_field(t, text, i + 1, end, out, nesting);
        continue;
      }
      if (c == '}') {
        if (nesting == 0 && i + 1 < end && text[i + 1] == '}') {
          i += 2;
          continue;
        }
        if (nesting == 0) fail_at("f-string: single '}' is not allowed", advance_pos(t.begin, text.substr(0, i)));
        return;
      }
      ++i;
    }
  }

  // Parses one `{expr[=][!c][:spec]}` starting just after the brace; returns
  // the index after the closing brace.
  std::size_t replacement_field(const Token& t, std::string_view text, std::size_t i,
                                std::size_t end, std::vector<ExprPtr>& out, int nesting) {
    if (nesting >= 2) fail_at("f-string: expressions nested too deeply", advance_pos(t.begin, text.substr(0, i)));
    std::size_t expr_begin = i;
    int depth = 0;
    char in_quote = 0;
    std::size_t expr_end = std::string_view::npos;
    for (; i < end; ++i) {
      char c = text[i];
      if (in_quote) {
        if (c == in_quote) in_quote = 0;
        continue;
      }
      if (c == '\'' || c == '"') {
        in_quote = c;
        continue;
      }
      if (c == '(' || c == '[' || c == '{') {
        ++depth;
        continue;
      }
      if ((c == ')' || c == ']' || c == '}') && depth > 0) {
        --depth;
        continue;
      }
      if (depth > 0) continue;
      if (c == '}' || c == ':') {
        expr_end = i;
        break;
      }
      if (c == '!' && i + 1 < end && text[i + 1] != '=') {
        expr_end = i;
        break;
      }
      if (c == '=' && i > expr_begin && std::string_view("=!<>").find(text[i - 1]) == std::string_view::npos) {
        std::size_t next = text.find_first_not_of(" \t\n\r\f", i + 1);
        if (next < end && (text[next] == '}' || text[next] == '!' || text[next] == ':')) {
          expr_end = i;
          break;
        }
      }
    }
    Pos where = advance_pos(t.begin, text.substr(0, expr_begin));
    if (expr_end == std::string_view::npos) fail_at("f-string: expecting '}'", where);
    std::string_view source = text.substr(expr_begin, expr_end - expr_begin);
    if (source.find_first_not_of(" \t\n\r\f") == std::string_view::npos) {
      fail_at("f-string: empty expression not allowed", where);
    }
    out.push_back(parse_field(source, where));
    i = expr_end;
    if (text[i] == '=') i = text.find_first_not_of(" \t\n\r\f", i + 1);
    if (i < end && text[i] == '!') {
      i += 2;
      if (i > end) fail_at("f-string: invalid conversion character", where);
    }
    if (i < end && text[i] == ':') {
      ++i;
      // Format spec: literal text with nested replacement fields.
      while (i < end && text[i] != '}') {
        if (text[i] == '{') {
          i = replacement_field(t, text, i + 1, end, out, nesting + 1);
          continue;
        }
        ++i;
      }
    }
    if (i >= end || text[i] != '}') fail_at("f-string: expecting '}'", where);
    return i + 1;
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
  std::unordered_map<const Stmt*, Pos> semicolon_end_;
};

}  // namespace

Module parse_module(std::string_view source) {
  Parser parser(tokenize(source));
  return parser.module();
}

ExprPtr parse_field(std::string_view source, Pos origin) {
  LexOptions options;
  options.origin = origin;
  options.bracketed = true;
  Parser parser(tokenize(source, options));
  return parser.field_expression();
}

ExprPtr parse_expression(std::string_view source, Pos origin) {
  LexOptions options;
  options.origin = origin;
  options.bracketed = true;
  Parser parser(tokenize(source, options));
  return parser.standalone_expression();
}

std::string_view to_string(StmtKind kind) {
  switch (kind) {
    case StmtKind::Expr: return "Expr";
    case StmtKind::Assign: return "Assign";
    case StmtKind::AugAssign: return "AugAssign";
    case StmtKind::AnnAssign: return "AnnAssign";
    case StmtKind::Pass: return "Pass";
    case StmtKind::Break: return "Break";
    case StmtKind::Continue: return "Continue";
    case StmtKind::Return: return "Return";
    case StmtKind::Raise: return "Raise";
    case StmtKind::Global: return "Global";
    case StmtKind::Nonlocal: return "Nonlocal";
    case StmtKind::Delete: return "Delete";
    case StmtKind::Assert: return "Assert";
    case StmtKind::Import: return "Import";
    case StmtKind::ImportFrom: return "ImportFrom";
    case StmtKind::If: return "If";
    case StmtKind::While: return "While";
    case StmtKind::For: return "For";
    case StmtKind::Try: return "Try";
    case StmtKind::With: return "With";
    case StmtKind::FunctionDef: return "FunctionDef";
    case StmtKind::ClassDef: return "ClassDef";
    case StmtKind::Match: return "Match";
  }
  return "?";
}

std::string_view to_string(ExprKind kind) {
  switch (kind) {
    case ExprKind::Name: return "Name";
    case ExprKind::Constant: return "Constant";
    case ExprKind::FormattedStr: return "JoinedStr";
    case ExprKind::Attribute: return "Attribute";
    case ExprKind::Subscript: return "Subscript";
    case ExprKind::Slice: return "Slice";
    case ExprKind::Call: return "Call";
    case ExprKind::Keyword: return "keyword";
    case ExprKind::Starred: return "Starred";
    case ExprKind::UnaryOp: return "UnaryOp";
    case ExprKind::BinOp: return "BinOp";
    case ExprKind::BoolOp: return "BoolOp";
    case ExprKind::Compare: return "Compare";
    case ExprKind::IfExp: return "IfExp";
    case ExprKind::Lambda: return "Lambda";
    case ExprKind::NamedExpr: return "NamedExpr";
    case ExprKind::Tuple: return "Tuple";
    case ExprKind::List: return "List";
    case ExprKind::Set: return "Set";
    case ExprKind::Dict: return "Dict";
    case ExprKind::ListComp: return "ListComp";
    case ExprKind::SetComp: return "SetComp";
    case ExprKind::GeneratorExp: return "GeneratorExp";
    case ExprKind::DictComp: return "DictComp";
    case ExprKind::Await: return "Await";
    case ExprKind::Yield: return "Yield";
    case ExprKind::YieldFrom: return "YieldFrom";
    case ExprKind::MatchValue: return "MatchValue";
    case ExprKind::MatchCapture: return "MatchAs";
    case ExprKind::MatchWildcard: return "MatchAs";
    case ExprKind::MatchStar: return "MatchStar";
    case ExprKind::MatchSequence: return "MatchSequence";
    case ExprKind::MatchMapping: return "MatchMapping";
    case ExprKind::MatchClass: return "MatchClass";
    case ExprKind::MatchKeyword: return "MatchKeyword";
    case ExprKind::MatchOr: return "MatchOr";
  }
  return "?";
}

}  // namespace itest::py
