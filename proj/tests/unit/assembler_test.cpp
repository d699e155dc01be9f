#include "itest/assembler.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include <fmt/format.h>

#include "itest/finder.hpp"
#include "support/test_support.hpp"

using namespace itest;
using itest::testing::capture;
using itest::testing::shell_quote;
using itest::testing::TempDir;
using itest::testing::write_file;

namespace {

struct Built {
  SourceFile source;
  std::vector<std::shared_ptr<const InlineTestDecl>> decls;
};

Built build(const std::string& text, const std::string& path = "subject.py") {
  SourceFile source = SourceFile::parse(path, text);
  Built b{source, {}};
  for (const auto& raw : find_inline_tests(source)) {
    b.decls.push_back(std::make_shared<const InlineTestDecl>(extract_declaration(raw, source)));
  }
  return b;
}

std::vector<TestCase> cases_of(const Built& b, std::size_t k) {
  ModuleIndex index(b.source);
  const auto& decl = b.decls.at(k);
  return expand(decl, validate_parameterization(*decl), resolve_dependencies(*decl, index));
}

// Runs a program under the reference interpreter and returns the last
// sentinel line it printed together with its exit status.
std::string run_program(const std::string& program) {
  TempDir dir;
  write_file(dir / "program.py", program);
  std::string out = capture("cd " + shell_quote(dir.path().string()) + " && " + ITEST_PYTHON + " program.py 2>&1; echo \"exit=$?\"");
  std::string verdict;
  std::size_t pos = 0;
  while (pos < out.size()) {
    std::size_t end = out.find('\n', pos);
    if (end == std::string::npos) end = out.size();
    std::string line = out.substr(pos, end - pos);
    if (line.rfind("ITEST-", 0) == 0) verdict = line.substr(0, line.find(' '));
    if (line.rfind("exit=", 0) == 0) verdict += " " + line;
    pos = end + 1;
  }
  return verdict;
}

}  // namespace

TEST(Assembler, Figure1ProgramPassesAndTheMutationFails) {
  std::string fig1 =
      "import re\n"
      "from inline import itest\n"
      "def get_assignment_map(names):\n"
      "    for name in names:\n"
      "        m = re.match(\"^(.+):\\\\d+$\", name)\n"
      "        itest().given(name, \"a:0\").check_eq(m.group(1), \"a\")\n";
  auto cases = cases_of(build(fig1), 0);
  ASSERT_EQ(cases.size(), 1u);
  EXPECT_EQ(cases[0].program.support_statements, (std::vector<std::string>{"import re"}));
  EXPECT_EQ(run_program(generate_program(cases[0])), "ITEST-PASS exit=0");

  std::string mutated = fig1;
  mutated.replace(mutated.find("\"a\")\n"), 3, "\"aa\"");
  auto bad = cases_of(build(mutated), 0);
  EXPECT_EQ(run_program(generate_program(bad[0])), "ITEST-FAIL exit=1");
}

TEST(Assembler, MarkerImportIsDroppedFromSharedImports) {
  auto cases = cases_of(build("from inline import itest, helper\nx = helper(1)\nitest().check_true(x)\n"), 0);
  EXPECT_EQ(cases[0].program.support_statements, (std::vector<std::string>{"from inline import helper"}));
}

TEST(Assembler, RelativeImportsBecomeAbsoluteInsideAPackage) {
  SourceFile source = SourceFile::parse(
      "pkg/sub/mod.py", "from inline import itest\nfrom ..units import FACTOR\nfrom . import peer\ny = FACTOR + peer.V\nitest().check_true(y)\n");
  ModuleIndex index(source, "pkg.sub");
  auto raw = find_inline_tests(source);
  InlineTestDecl decl = extract_declaration(raw.at(0), source);
  EXPECT_EQ(resolve_dependencies(decl, index),
            (std::vector<std::string>{"from pkg.units import FACTOR", "from pkg.sub import peer"}));
}

TEST(Assembler, PackageInfoWalksUpThroughInitFiles) {
  TempDir dir;
  write_file(dir / "root/pkg/__init__.py", "");
  write_file(dir / "root/pkg/sub/__init__.py", "");
  write_file(dir / "root/pkg/sub/mod.py", "");
  write_file(dir / "root/script.py", "");
  PackageInfo info = package_info((dir / "root/pkg/sub/mod.py").string());
  EXPECT_EQ(info.package, "pkg.sub");
  EXPECT_EQ(std::filesystem::path(info.import_root), (dir / "root").lexically_normal());
  EXPECT_EQ(package_info((dir / "root/script.py").string()).package, "");
}

TEST(Assembler, MainGuardIsNeverCopied) {
  Built b = build(
      "from inline import itest\n"
      "def f():\n    return 1\n"
      "if __name__ == '__main__':\n    f = None\n"
      "def g():\n    y = f()\n    itest().check_eq(y, 1)\n");
  auto cases = cases_of(b, 0);
  EXPECT_EQ(cases[0].program.support_statements, (std::vector<std::string>{"def f():\n    return 1"}));
}

TEST(Assembler, FutureImportsComeFirst) {
  Built b = build("from __future__ import annotations\nfrom inline import itest\nx: int = 1\nitest().check_eq(x, 1)\n");
  std::string program = generate_program(cases_of(b, 0)[0]);
  EXPECT_EQ(program.rfind("from __future__ import annotations\n", 0), 0u);
  EXPECT_EQ(run_program(program), "ITEST-PASS exit=0");
}

TEST(Assembler, UnresolvedNameIsACollectionError) {
  Built b = build("from inline import itest\ny = later(1)\nitest().check_true(y)\ndef later(v):\n    return v\n");
  ModuleIndex index(b.source);
  try {
    resolve_dependencies(*b.decls[0], index);
    FAIL() << "expected UnresolvedNameError";
  } catch (const UnresolvedNameError& e) {
    EXPECT_EQ(e.name(), "later");
    EXPECT_EQ(e.where().line, 3);
  }
}

TEST(Assembler, StarImportCoversUnknownNames) {
  Built b = build("from os.path import *\nfrom inline import itest\ny = join('a', 'b')\nitest().check_eq(y, 'a/b')\n");
  auto cases = cases_of(b, 0);
  EXPECT_EQ(cases[0].program.support_statements, (std::vector<std::string>{"from os.path import *"}));
  EXPECT_EQ(run_program(generate_program(cases[0])), "ITEST-PASS exit=0");
}

TEST(Assembler, ParameterizedCasesEachCarryTheSharedConstant) {
  Built b = build(
      "from inline import itest\n"
      "OFFSET = 10\n"
      "def shift(v):\n"
      "    out = v + OFFSET\n"
      "    itest(parameterized=True).given(v, [1, 2, 3]).check_eq(out, [11, 12, 13])\n"
      "    return out\n");
  auto cases = cases_of(b, 0);
  ASSERT_EQ(cases.size(), 3u);
  for (std::size_t i = 0; i < cases.size(); ++i) {
    EXPECT_EQ(cases[i].id, "subject.py::5[p" + std::to_string(i) + "]");
    EXPECT_EQ(cases[i].program.support_statements, (std::vector<std::string>{"OFFSET = 10"}));
    EXPECT_EQ(cases[i].program.input_statements, (std::vector<std::string>{"v = " + std::to_string(i + 1)}));
    EXPECT_EQ(run_program(generate_program(cases[i])), "ITEST-PASS exit=0");
  }
}

TEST(Assembler, AssumptionGuardsTheBody) {
  Built b = build("from inline import itest\nLIMIT = 1\nx = 1\nitest().assume(LIMIT > 5).given(x, 1).check_eq(x, 2)\n");
  EXPECT_EQ(run_program(generate_program(cases_of(b, 0)[0])), "ITEST-SKIP-ASSUMPTION exit=0");
}

TEST(Assembler, NestedTargetIsReindentedWithStringsIntact) {
  Built b = build(
      "from inline import itest\n"
      "class K:\n"
      "    def m(self, n):\n"
      "        if n:\n"
      "            text = '''line one\n"
      "  kept indent'''.upper() * n\n"
      "            itest().given(n, 1).check_eq(text, 'LINE ONE\\n  KEPT INDENT')\n"
      "        return text\n");
  EXPECT_EQ(run_program(generate_program(cases_of(b, 0)[0])), "ITEST-PASS exit=0");
}

TEST(Assembler, NestedInlineTestsInsideACompoundTargetAreRemoved) {
  Built b = build(
      "from inline import itest\n"
      "total = 0\n"
      "for i in range(3):\n"
      "    total += i\n"
      "    itest().given(total, 5).given(i, 1).check_eq(total, 6)\n"
      "itest().check_eq(total, 3)\n");
  ASSERT_EQ(b.decls.size(), 2u);
  auto outer = cases_of(b, 1);
  EXPECT_EQ(outer[0].program.target_text, "for i in range(3):\n    total += i\n    pass");
  EXPECT_EQ(run_program(generate_program(outer[0])), "ITEST-PASS exit=0");
  EXPECT_EQ(run_program(generate_program(cases_of(b, 0)[0])), "ITEST-PASS exit=0");
}

TEST(Assembler, GenerationIsDeterministic) {
  std::string text =
      "import math\nfrom inline import itest\nK = 3\ndef f(v):\n    r = math.floor(v) * K\n"
      "    itest(parameterized=True, repeated=2, tag=['a']).given(v, [1.5, 2.5]).check_eq(r, [3, 6])\n"
      "    return r\n";
  std::vector<std::string> first;
  for (const auto& c : cases_of(build(text), 0)) first.push_back(generate_program(c));
  for (int round = 0; round < 5; ++round) {
    std::vector<std::string> again;
    for (const auto& c : cases_of(build(text), 0)) again.push_back(generate_program(c));
    EXPECT_EQ(again, first);
  }
}

// Random modules with a known dependency graph. Each statement binds one
// name and reads others; the expected support set is the transitive
// closure over every binder of each needed name, limited to statements
// above a top-level target.
TEST(AssemblerProperty, SupportIsTheTransitiveClosure) {
  std::mt19937 rng(7);
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  const std::vector<std::string> names = {"a", "b", "c", "d", "e", "f", "g", "h"};
  int unresolved_trials = 0;
  for (int trial = 0; trial < 500; ++trial) {
    struct Statement {
      std::string text;
      std::string binds;
      std::vector<std::string> reads;
    };
    std::vector<Statement> module;
    std::size_t count = 4 + pick(12);
    for (std::size_t i = 0; i < count; ++i) {
      Statement s;
      s.binds = names[pick(names.size())];
      for (std::size_t r = pick(3); r > 0; --r) s.reads.push_back(names[pick(names.size())]);
      std::string expr = std::to_string(i);
      for (const auto& r : s.reads) expr += " + " + r;
      switch (pick(3)) {
        case 0: s.text = fmt::format("{} = {}", s.binds, expr); break;
        case 1:
          s.text = fmt::format("def {}():\n    return {}", s.binds, expr);
          // A function reading its own name refers to itself.
          s.reads.erase(std::remove(s.reads.begin(), s.reads.end(), s.binds), s.reads.end());
          break;
        default: s.text = fmt::format("class {}:\n    v = {}", s.binds, expr); break;
      }
      module.push_back(s);
    }
    bool nested = pick(2) == 0;
    std::size_t horizon = nested ? module.size() : pick(module.size() + 1);
    std::vector<std::string> target_reads;
    for (std::size_t r = 1 + pick(2); r > 0; --r) target_reads.push_back(names[pick(names.size())]);

    std::string text = "from inline import itest\n";
    std::string target = "result = 0";
    for (const auto& r : target_reads) target += " + " + r;
    for (std::size_t i = 0; i < module.size(); ++i) {
      if (!nested && i == horizon) text += target + "\nitest().check_true(result)\n";
      text += module[i].text + "\n";
    }
    if (!nested && horizon == module.size()) text += target + "\nitest().check_true(result)\n";
    if (nested) text += "def tested():\n    " + target + "\n    itest().check_true(result)\n";

    std::set<std::size_t> expected;
    std::set<std::string> seen;
    std::vector<std::string> queue = target_reads;
    bool unresolved = false;
    while (!queue.empty()) {
      std::string n = queue.back();
      queue.pop_back();
      if (!seen.insert(n).second) continue;
      bool bound = false;
      for (std::size_t i = 0; i < horizon; ++i) {
        if (module[i].binds != n) continue;
        bound = true;
        if (expected.insert(i).second) queue.insert(queue.end(), module[i].reads.begin(), module[i].reads.end());
      }
      unresolved = unresolved || !bound;
    }

    Built b = build(text);
    ASSERT_EQ(b.decls.size(), 1u) << text;
    ModuleIndex index(b.source);
    if (unresolved) {
      EXPECT_THROW(resolve_dependencies(*b.decls[0], index), UnresolvedNameError) << text;
      ++unresolved_trials;
      continue;
    }
    std::vector<std::string> want;
    for (std::size_t i : expected) want.push_back(module[i].text);
    EXPECT_EQ(resolve_dependencies(*b.decls[0], index), want) << text;
  }
  EXPECT_GT(unresolved_trials, 20);
  EXPECT_LT(unresolved_trials, 480);
}
