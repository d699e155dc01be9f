// Cross-checks the parser against CPython's own `ast` module: for every file
// in a corpus, both sides must agree on whether it parses and, when it does,
// on the kind and span of every statement.

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "itest/python/parser.hpp"
#include "support/test_support.hpp"

namespace fs = std::filesystem;
using namespace itest::py;
using itest::testing::python_files;
using itest::testing::read_file;

namespace {

void dump(const Block& block, std::vector<std::string>& out) {
  for (const auto& s : block) {
    std::ostringstream row;
    row << to_string(s->kind) << ' ' << s->span.begin.line << ' ' << s->span.begin.col << ' '
        << s->span.end.line << ' ' << s->span.end.col;
    out.push_back(row.str());
    for_each_block(*s, [&](const Block& b) { dump(b, out); });
  }
}

std::vector<std::string> ours(const std::string& path) {
  std::string text = read_file(path);
  std::vector<std::string> rows;
  try {
    Module m = parse_module(text);
    dump(m.body, rows);
  } catch (const SyntaxError&) {
    rows = {"SyntaxError"};
  }
  return rows;
}

std::map<std::string, std::vector<std::string>> cpython(const std::vector<std::string>& files) {
  std::string cmd = std::string(ITEST_PYTHON) + " " + ITEST_SOURCE_DIR + "/tests/support/ast_spans.py";
  for (const auto& f : files) cmd += " '" + f + "'";
  std::map<std::string, std::vector<std::string>> result;
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
  if (!pipe) return result;
  std::string current;
  char buf[4096];
  std::string line;
  while (fgets(buf, sizeof buf, pipe.get())) {
    line = buf;
    if (!line.empty() && line.back() == '\n') line.pop_back();
    if (line.rfind("== ", 0) == 0) {
      current = line.substr(3);
      result[current];
    } else if (!line.empty()) {
      result[current].push_back(line);
    }
  }
  return result;
}

void compare(const std::vector<std::string>& files) {
  auto expected = cpython(files);
  ASSERT_EQ(expected.size(), files.size()) << "reference interpreter did not report every file";
  std::size_t mismatched = 0;
  for (const auto& f : files) {
    auto mine = ours(f);
    const auto& theirs = expected[f];
    if (mine == theirs) continue;
    ++mismatched;
    std::size_t i = 0;
    while (i < mine.size() && i < theirs.size() && mine[i] == theirs[i]) ++i;
    ADD_FAILURE() << f << ": first difference at row " << i << ": ours '"
                  << (i < mine.size() ? mine[i] : "<end>") << "' vs cpython '"
                  << (i < theirs.size() ? theirs[i] : "<end>") << "'";
    if (mismatched > 20) break;
  }
}

}  // namespace

TEST(ParserOracle, AgreesWithCPythonOnGoldenCorpus) {
  compare(python_files(fs::path(ITEST_SOURCE_DIR) / "tests" / "corpus"));
}

TEST(ParserOracle, AgreesWithCPythonOnStandardLibrary) {
  auto files = python_files("/usr/lib/python3.10");
  if (files.empty()) GTEST_SKIP() << "standard library sources not installed";
  // lib2to3 test data deliberately contains Python 2 and broken files.
  std::erase_if(files, [](const std::string& f) {
    return f.find("lib2to3/tests/data") != std::string::npos || f.find("/test/bad") != std::string::npos ||
           f.find("badsyntax") != std::string::npos;
  });
  compare(files);
}
