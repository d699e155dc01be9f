#include "itest/extractor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>

#include <fmt/format.h>

#include "itest/python/names.hpp"
#include "itest/text.hpp"

namespace itest {
namespace {

using py::Expr;
using py::ExprKind;

struct KindName {
  CheckKind kind;
  std::string_view name;
};

constexpr std::array<KindName, 8> kCheckKinds{{
    {CheckKind::Eq, "eq"},
    {CheckKind::Neq, "neq"},
    {CheckKind::True, "true"},
    {CheckKind::False, "false"},
    {CheckKind::None, "none"},
    {CheckKind::NotNone, "not_none"},
    {CheckKind::Same, "same"},
    {CheckKind::NotSame, "not_same"},
}};

constexpr std::array<std::string_view, 6> kConstructorParams{"test_name", "parameterized", "repeated",
                                                             "tag",       "disabled",      "timeout"};

struct ChainCall {
  std::string_view method;  // empty for the constructor
  const Expr* call;
};

class Extractor {
 public:
  Extractor(const RawInlineTest& raw, const SourceFile& source) : raw_(raw), source_(source) {}

  InlineTestDecl run() {
    if (raw_.embedded) {
      fail(reason::kNotAStatement, raw_.location,
           "inline test must be a statement of its own, not part of an expression");
    }
    InlineTestDecl decl;
    decl.location = raw_.location;
    decl.target = resolve_target(raw_, source_);

    std::vector<ChainCall> chain = flatten(*raw_.chain);
    constructor(*chain.front().call, decl);
    bool seen_check = false;
    for (std::size_t i = 1; i < chain.size(); ++i) {
      const ChainCall& c = chain[i];
      std::vector<const Expr*> args = positional_args(c);
      if (c.method == "given") {
        arity(c, args, 2);
        if (seen_check) fail(reason::kGivenAfterCheck, where(*c.call), "given() must come before the first check");
        if (args[0]->kind != ExprKind::Name) {
          fail(reason::kNonIdentifierGivenTarget, where(*args[0]),
               fmt::format("given() needs a variable name as its first argument, got `{}`", slice(*args[0])));
        }
        const std::string& variable = args[0]->id;
        for (const auto& a : decl.assignments) {
          if (a.variable == variable) {
            fail(reason::kDuplicateGiven, where(*args[0]), fmt::format("variable `{}` is given twice", variable));
          }
        }
        decl.assignments.push_back({variable, expr_text(*args[1])});
      } else if (c.method == "assume") {
        arity(c, args, 1);
        if (seen_check) {
          fail(reason::kAssumeAfterCheck, where(*c.call), "assume() must come before the first check");
        }
        decl.assumptions.push_back(expr_text(*args[0]));
      } else if (auto kind = check_kind_from_method(c.method)) {
        arity(c, args, is_binary(*kind) ? 2 : 1);
        Check check{*kind, expr_text(*args[0]), std::nullopt};
        if (is_binary(*kind)) check.expected = expr_text(*args[1]);
        decl.checks.push_back(std::move(check));
        seen_check = true;
      } else {
        fail(reason::kUnknownMethod, where(*c.call), fmt::format("unknown inline test method `{}`", c.method));
      }
    }
    if (decl.checks.empty()) fail(reason::kNoCheck, raw_.location, "inline test has no check_* call");
    return decl;
  }

 private:
  [[noreturn]] void fail(const char* code, Location at, const std::string& message) const {
    throw MalformedError(code, std::move(at), message);
  }

  Location where(const Expr& e) const { return {source_.path(), e.span.begin.line, e.span.begin.col}; }

  std::string slice(const Expr& e) const { return std::string(source_.slice(e.span)); }

  ExprText expr_text(const Expr& e) const {
    ExprText t{slice(e), std::nullopt};
    if (e.kind == ExprKind::List) {
      std::vector<std::string> elements;
      for (const auto& c : e.children) {
        if (c->kind == ExprKind::Starred) return t;
        elements.push_back(slice(*c));
      }
      t.elements = std::move(elements);
    }
    return t;
  }

  static std::vector<ChainCall> flatten(const Expr& outer) {
    std::vector<ChainCall> chain;
    const Expr* e = &outer;
    while (e->children[0]->kind == ExprKind::Attribute) {
      const Expr& attr = *e->children[0];
      chain.push_back({attr.id, e});
      e = attr.children[0].get();
    }
    chain.push_back({{}, e});
    std::reverse(chain.begin(), chain.end());
    return chain;
  }

  std::vector<const Expr*> positional_args(const ChainCall& c) const {
    std::vector<const Expr*> args;
    for (std::size_t i = 1; i < c.call->children.size(); ++i) {
      const Expr& a = *c.call->children[i];
      if (a.kind == ExprKind::Keyword || a.kind == ExprKind::Starred) {
        fail(reason::kBadArity, where(a), fmt::format("{}() takes positional arguments only", c.method));
      }
      args.push_back(&a);
    }
    return args;
  }

  void arity(const ChainCall& c, const std::vector<const Expr*>& args, std::size_t expected) const {
    if (args.size() == expected) return;
    fail(reason::kBadArity, where(*c.call),
         fmt::format("{}() takes {} argument{} but {} were given", c.method, expected, expected == 1 ? "" : "s",
                     args.size()));
  }

  void constructor(const Expr& call, InlineTestDecl& decl) const {
    std::vector<bool> assigned(kConstructorParams.size(), false);
    std::size_t position = 0;
    for (std::size_t i = 1; i < call.children.size(); ++i) {
      const Expr& a = *call.children[i];
      std::size_t param;
      const Expr* value = &a;
      if (a.kind == ExprKind::Starred || (a.kind == ExprKind::Keyword && a.id.empty())) {
        fail(reason::kBadConstructorArg, where(a), "itest() arguments cannot be unpacked");
      }
      if (a.kind == ExprKind::Keyword) {
        auto it = std::find(kConstructorParams.begin(), kConstructorParams.end(), a.id);
        if (it == kConstructorParams.end()) {
          fail(reason::kBadConstructorArg, where(a), fmt::format("unknown itest() argument `{}`", a.id));
        }
        param = static_cast<std::size_t>(it - kConstructorParams.begin());
        value = a.children[0].get();
      } else {
        if (position >= kConstructorParams.size()) {
          fail(reason::kBadArity, where(a),
               fmt::format("itest() takes at most {} positional arguments", kConstructorParams.size()));
        }
        param = position++;
      }
      if (assigned[param]) {
        fail(reason::kBadConstructorArg, where(a),
             fmt::format("itest() got multiple values for `{}`", kConstructorParams[param]));
      }
      assigned[param] = true;
      constructor_value(kConstructorParams[param], *value, decl);
    }
  }

  void constructor_value(std::string_view param, const Expr& value, InlineTestDecl& decl) const {
    auto bad = [&](std::string_view expected) {
      fail(reason::kBadConstructorArg, where(value),
           fmt::format("itest() argument `{}` must be {}, got `{}`", param, expected, slice(value)));
    };
    if (param == "test_name") {
      std::string name;
      if (!string_value(value, name)) bad("a string literal");
      decl.test_name = name;
    } else if (param == "parameterized" || param == "disabled") {
      if (value.kind != ExprKind::Constant || (value.id != "True" && value.id != "False")) bad("True or False");
      (param == "parameterized" ? decl.parameterized : decl.disabled) = value.id == "True";
    } else if (param == "repeated") {
      long long n = 0;
      if (!integer_value(value, n) || n < 1 || n > 1000000) bad("a positive integer literal");
      decl.repeated = static_cast<int>(n);
    } else if (param == "tag") {
      if (value.kind != ExprKind::List && value.kind != ExprKind::Tuple) bad("a list of string literals");
      decl.tags.clear();
      for (const auto& c : value.children) {
        std::string tag;
        if (!string_value(*c, tag)) bad("a list of string literals");
        decl.tags.push_back(tag);
      }
    } else if (param == "timeout") {
      double seconds = 0;
      if (!number_value(value, seconds) || !(seconds > 0) || !std::isfinite(seconds)) {
        bad("a positive number literal");
      }
      decl.timeout = seconds;
    }
  }

  bool string_value(const Expr& e, std::string& out) const {
    return e.kind == ExprKind::Constant && e.id == "str" && text::decode_string_literal(source_.slice(e.span), out);
  }

  bool integer_value(const Expr& e, long long& out) const {
    if (e.kind != ExprKind::Constant || e.id != "num") return false;
    std::string digits;
    for (char c : source_.slice(e.span)) {
      if (c == '_') continue;
      if (c < '0' || c > '9') return false;
      digits += c;
    }
    if (digits.empty() || digits.size() > 12) return false;
    out = std::stoll(digits);
    return true;
  }

  bool number_value(const Expr& e, double& out) const {
    if (e.kind != ExprKind::Constant || e.id != "num") return false;
    std::string digits;
    for (char c : source_.slice(e.span)) {
      if (c == '_') continue;
      if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == 'e' || c == 'E' || c == '+' ||
            c == '-')) {
        return false;
      }
      digits += c;
    }
    char* end = nullptr;
    out = std::strtod(digits.c_str(), &end);
    return end && *end == '\0' && !digits.empty();
  }

  const RawInlineTest& raw_;
  const SourceFile& source_;
};

bool skip_inline_tests(const py::Stmt& s) { return is_inline_test_statement(s); }

}  // namespace

std::string_view to_string(CheckKind kind) {
  for (const auto& k : kCheckKinds) {
    if (k.kind == kind) return k.name;
  }
  return "?";
}

std::optional<CheckKind> check_kind_from_method(std::string_view method) {
  if (method.substr(0, 6) != "check_") return std::nullopt;
  method.remove_prefix(6);
  for (const auto& k : kCheckKinds) {
    if (k.name == method) return k.kind;
  }
  return std::nullopt;
}

bool is_binary(CheckKind kind) {
  return kind == CheckKind::Eq || kind == CheckKind::Neq || kind == CheckKind::Same || kind == CheckKind::NotSame;
}

TargetStatement resolve_target(const RawInlineTest& raw, const SourceFile& source) {
  const py::Block& block = *raw.enclosing_block;
  for (std::size_t i = raw.index_in_block; i-- > 0;) {
    const py::Stmt& s = *block[i];
    if (is_inline_test_statement(s)) continue;
    if (is_marker_import(s)) break;
    TargetStatement t;
    StatementSource src = statement_source(s, source);
    t.statement_text = std::move(src.text);
    t.string_lines = std::move(src.string_lines);
    t.location = {source.path(), s.span.begin.line, s.span.begin.col};
    py::NameUsage usage = py::analyze_statement(s, skip_inline_tests);
    t.free_names = usage.free.items();
    t.bound_names = usage.bound.items();
    if (&block == &source.module().body) t.top_level_index = i;
    return t;
  }
  throw NoTargetError(raw.location);
}

InlineTestDecl extract_declaration(const RawInlineTest& raw, const SourceFile& source) {
  return Extractor(raw, source).run();
}

std::size_t validate_parameterization(const InlineTestDecl& decl) {
  if (!decl.parameterized) return 1;
  std::optional<std::size_t> n;
  auto element_count = [&](const ExprText& e, const std::string& what) {
    std::size_t size = e.elements->size();
    if (size == 0) {
      throw MalformedError(reason::kParamLengthMismatch, decl.location,
                           fmt::format("parameterized {} is an empty list", what));
    }
    if (n && *n != size) {
      throw MalformedError(reason::kParamLengthMismatch, decl.location,
                           fmt::format("parameterized {} has {} values, expected {}", what, size, *n));
    }
    n = size;
  };
  for (const auto& a : decl.assignments) {
    if (!a.value.elements) {
      throw MalformedError(reason::kParamNotList, decl.location,
                           fmt::format("parameterized given value for `{}` is not a list literal", a.variable));
    }
    element_count(a.value, fmt::format("given value for `{}`", a.variable));
  }
  for (const auto& c : decl.checks) {
    if (c.actual.elements) element_count(c.actual, "check argument `" + c.actual.text + "`");
    if (c.expected && c.expected->elements) element_count(*c.expected, "check argument `" + c.expected->text + "`");
  }
  if (!n) {
    throw MalformedError(reason::kParamNotList, decl.location, "parameterized inline test has no list of values");
  }
  return *n;
}

std::vector<std::string> unread_given_variables(const InlineTestDecl& decl) {
  std::vector<std::string> unread;
  for (const auto& a : decl.assignments) {
    const auto& free = decl.target.free_names;
    if (std::find(free.begin(), free.end(), a.variable) == free.end()) unread.push_back(a.variable);
  }
  return unread;
}

std::string check_source(const Check& check) {
  std::string out = fmt::format("check_{}({}", to_string(check.kind), check.actual.text);
  if (check.expected) out += ", " + check.expected->text;
  return out + ")";
}

std::string to_chain_source(const InlineTestDecl& decl) {
  std::vector<std::string> args;
  if (decl.test_name) args.push_back("test_name=" + text::py_string_literal(*decl.test_name));
  if (decl.parameterized) args.emplace_back("parameterized=True");
  if (decl.repeated != 1) args.push_back(fmt::format("repeated={}", decl.repeated));
  if (!decl.tags.empty()) {
    std::vector<std::string> tags;
    for (const auto& t : decl.tags) tags.push_back(text::py_string_literal(t));
    args.push_back(fmt::format("tag=[{}]", fmt::join(tags, ", ")));
  }
  if (decl.disabled) args.emplace_back("disabled=True");
  if (decl.timeout) args.push_back(fmt::format("timeout={}", *decl.timeout));
  std::string out = fmt::format("itest({})", fmt::join(args, ", "));
  for (const auto& a : decl.assumptions) out += ".assume(" + a.text + ")";
  for (const auto& a : decl.assignments) out += ".given(" + a.variable + ", " + a.value.text + ")";
  for (const auto& c : decl.checks) out += "." + check_source(c);
  return out;
}

}  // namespace itest
