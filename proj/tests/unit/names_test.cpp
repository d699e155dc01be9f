#include "itest/python/names.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <map>
#include <set>

#include "itest/python/parser.hpp"
#include "support/test_support.hpp"

using namespace itest::py;
using itest::testing::capture;
using itest::testing::python_files;
using itest::testing::read_file;
using itest::testing::shell_quote;

namespace {

std::vector<std::string> free_names(const std::string& source) {
  Module m = parse_module(source);
  return analyze_block(m.body).free.items();
}

std::vector<std::string> bound_names(const std::string& source) {
  Module m = parse_module(source);
  return analyze_block(m.body).bound.items();
}

using Names = std::vector<std::string>;

}  // namespace

TEST(Names, ReadBeforeBindIsFree) {
  EXPECT_EQ(free_names("y = x + 1\n"), (Names{"x"}));
  EXPECT_EQ(free_names("x = 1\ny = x + 1\n"), Names{});
  EXPECT_EQ(free_names("y = x\nx = 1\n"), (Names{"x"}));
}

TEST(Names, FreeNamesKeepFirstUseOrder) {
  EXPECT_EQ(free_names("print(b, a, c, a)\n"), (Names{"print", "b", "a", "c"}));
}

TEST(Names, AugmentedAssignmentReadsTarget) {
  EXPECT_EQ(free_names("total += step\n"), (Names{"total", "step"}));
  EXPECT_EQ(free_names("obj.count += 1\n"), (Names{"obj"}));
}

TEST(Names, AttributeAndSubscriptTargetsReadTheirBase) {
  EXPECT_EQ(free_names("cache[key] = value\n"), (Names{"value", "cache", "key"}));
  EXPECT_EQ(free_names("self.x = 1\n"), (Names{"self"}));
}

TEST(Names, UnpackingBindsEveryName) {
  EXPECT_EQ(bound_names("a, (b, *c) = data\n"), (Names{"a", "b", "c"}));
  EXPECT_EQ(free_names("a, (b, *c) = data\n"), (Names{"data"}));
}

TEST(Names, FunctionBodyReadsAreResolvedAgainstTheWholeNamespace) {
  EXPECT_EQ(free_names("def f():\n    return helper()\ndef helper():\n    return 1\n"), Names{});
  EXPECT_EQ(free_names("def f():\n    return missing\n"), (Names{"missing"}));
}

TEST(Names, ParametersAndLocalsAreNotFree) {
  EXPECT_EQ(free_names("def f(a, *b, c=d, **e):\n    g = a\n    return g, b, c, e\n"), (Names{"d"}));
}

TEST(Names, DecoratorsDefaultsAndAnnotationsAreReadImmediately) {
  EXPECT_EQ(free_names("@deco\ndef f(x: T = v) -> R:\n    pass\n"), (Names{"deco", "v", "T", "R"}));
}

TEST(Names, GlobalDeclarationReadsModuleName) {
  EXPECT_EQ(free_names("def bump():\n    global counter\n    counter += 1\n"), (Names{"counter"}));
}

TEST(Names, NonlocalNamesResolveInEnclosingFunction) {
  EXPECT_EQ(free_names("def outer():\n    n = 0\n    def inner():\n        nonlocal n\n        n += 1\n    return inner\n"),
            Names{});
}

TEST(Names, DeleteInFunctionMakesNameLocal) {
  EXPECT_EQ(free_names("def f():\n    x = 1\n    del x\n"), Names{});
}

TEST(Names, ClassBodyNamesAreNotVisibleToMethods) {
  // `limit` is a class attribute; the method body reads the module name.
  EXPECT_EQ(free_names("class C:\n    limit = 3\n    def f(self):\n        return limit\n"), (Names{"limit"}));
  EXPECT_EQ(free_names("class C(Base):\n    size = 2\n    double = size * 2\n"), (Names{"Base"}));
}

TEST(Names, ComprehensionVariablesDoNotLeak) {
  EXPECT_EQ(free_names("r = [x * k for x in items if x]\n"), (Names{"items", "k"}));
  EXPECT_EQ(bound_names("r = [x for x in items]\n"), (Names{"r"}));
  EXPECT_EQ(free_names("r = {k: v for k, v in pairs.items()}\n"), (Names{"pairs"}));
}

TEST(Names, NestedComprehensionUsesOuterTargets) {
  EXPECT_EQ(free_names("r = [y for x in rows for y in x]\n"), (Names{"rows"}));
}

TEST(Names, WalrusInComprehensionBindsInEnclosingScope) {
  EXPECT_EQ(bound_names("r = [last := x for x in data]\n"), (Names{"last", "r"}));
}

TEST(Names, LambdaParametersAreLocal) {
  EXPECT_EQ(free_names("f = lambda a, b=c: a + b + d\n"), (Names{"c", "d"}));
}

TEST(Names, ImportsBindTheirVisibleName) {
  EXPECT_EQ(bound_names("import os.path\nimport numpy as np\nfrom a import b, c as d\n"),
            (Names{"os", "np", "b", "d"}));
}

TEST(Names, ExceptionHandlersAndWithItemsBind) {
  EXPECT_EQ(free_names("try:\n    pass\nexcept E as e:\n    print(e)\nwith open(p) as fh:\n    fh.read()\n"),
            (Names{"E", "print", "open", "p"}));
}

TEST(Names, MatchPatternsBindCaptures) {
  EXPECT_EQ(free_names("match cmd:\n    case Point(x=0, y=yy) if yy > lim:\n        use(yy)\n    case [a, *rest]:\n        use(rest)\n"),
            (Names{"cmd", "Point", "lim", "use"}));
}

TEST(Names, SkippedStatementsAreIgnored) {
  Module m = parse_module("x = unknown()\ny = 1\n");
  auto skip_first = [&](const Stmt& s) { return &s == m.body[0].get(); };
  EXPECT_EQ(analyze_block(m.body, skip_first).free.items(), Names{});
  EXPECT_EQ(analyze_block(m.body, skip_first).bound.items(), (Names{"y"}));
}

TEST(Names, ExpressionAnalysis) {
  ExprPtr e = parse_expression("f(a)[b].c + len(d)");
  EXPECT_EQ(analyze_expression(*e).free.items(), (Names{"f", "a", "b", "len", "d"}));
}

TEST(Names, BuiltinsAreRecognized) {
  EXPECT_TRUE(is_builtin("len"));
  EXPECT_TRUE(is_builtin("ValueError"));
  EXPECT_TRUE(is_builtin("__name__"));
  EXPECT_FALSE(is_builtin("numpy"));
  EXPECT_FALSE(is_builtin("itest"));
}

// Every top-level function's module-level dependencies must agree with what
// CPython's symbol table reports for the same function.
TEST(NamesOracle, TopLevelFunctionsAgreeWithSymtable) {
  auto files = python_files("/usr/lib/python3.10");
  if (files.empty()) GTEST_SKIP() << "standard library sources not installed";
  std::string cmd = std::string(ITEST_PYTHON) + " " + ITEST_SOURCE_DIR + "/tests/support/free_names.py";
  for (const auto& f : files) cmd += " " + shell_quote(f);
  std::map<std::pair<std::string, int>, std::set<std::string>> expected;
  std::string out = capture(cmd);
  std::size_t pos = 0;
  while (pos < out.size()) {
    std::size_t nl = out.find('\n', pos);
    auto row = nlohmann::json::parse(out.substr(pos, nl - pos));
    std::set<std::string> names;
    for (const auto& n : row["free"]) {
      if (!is_builtin(n.get<std::string>())) names.insert(n.get<std::string>());
    }
    expected[{row["path"], row["line"]}] = names;
    pos = nl + 1;
  }
  ASSERT_GT(expected.size(), 1000u);

  std::size_t compared = 0, mismatched = 0;
  for (const auto& f : files) {
    Module m;
    try {
      m = parse_module(read_file(f));
    } catch (const SyntaxError&) {
      continue;
    }
    for (const auto& s : m.body) {
      if (s->kind != StmtKind::FunctionDef) continue;
      // The reference reports the `def` line, which follows any decorators.
      auto it = expected.end();
      for (int l = s->span.begin.line; l <= s->span.end.line && it == expected.end(); ++l) {
        it = expected.find({f, l});
      }
      if (it == expected.end()) continue;
      std::set<std::string> mine;
      for (const auto& n : analyze_statement(*s).free) {
        if (!is_builtin(n) && n != s->name) mine.insert(n);
      }
      ++compared;
      if (mine == it->second) continue;
      if (++mismatched <= 20) {
        std::string a, b;
        for (const auto& n : mine) a += n + " ";
        for (const auto& n : it->second) b += n + " ";
        ADD_FAILURE() << f << ":" << it->first.second << " " << s->name << "\n  ours:     " << a
                      << "\n  symtable: " << b;
      }
    }
  }
  EXPECT_GT(compared, 1000u);
}
