#include "itest/cli.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <sstream>

#include "support/test_support.hpp"

using namespace itest;
using itest::testing::read_file;
using itest::testing::TempDir;
using itest::testing::write_file;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

RunConfig parse(std::vector<std::string> args) {
  std::ostringstream out;
  auto config = parse_args(args, out);
  EXPECT_TRUE(config.has_value());
  return config.value_or(RunConfig{});
}

const char* kPassing =
    "from inline import itest\n"
    "x = 2\n"
    "y = x * 2\n"
    "itest().given(x, 3).check_eq(y, 6)\n";

}  // namespace

TEST(Cli, Defaults) {
  unsetenv("ITEST_INTERPRETER");
  RunConfig c = parse({});
  EXPECT_EQ(c.paths, (std::vector<std::string>{"."}));
  EXPECT_EQ(c.parallelism, 1u);
  EXPECT_EQ(c.interpreter_command, (std::vector<std::string>{"python3"}));
  EXPECT_FALSE(c.default_timeout.has_value());
  EXPECT_FALSE(c.name_filter.has_value());
}

TEST(Cli, RepeatableTagsAndLongAliases) {
  RunConfig c = parse({"--group", "str", "--inlinetest-group=bit", "src", "--order", "fast", "--inlinetest-order",
                       "slow", "--order", "fast", "lib"});
  EXPECT_EQ(c.group_tags, (std::vector<std::string>{"str", "bit"}));
  EXPECT_EQ(c.order_tags, (std::vector<std::string>{"fast", "slow"}));
  EXPECT_EQ(c.paths, (std::vector<std::string>{"src", "lib"}));
  EXPECT_TRUE(parse({"--inlinetest-ignore-import-errors"}).ignore_import_errors);
}

TEST(Cli, ParallelismAndFilters) {
  EXPECT_EQ(parse({"-n", "auto"}).parallelism, 0u);
  EXPECT_EQ(parse({"-n", "4"}).parallelism, 4u);
  RunConfig c = parse({"-k", "add", "--timeout", "2.5", "--report", "r.json", "-v", "--list-only"});
  EXPECT_EQ(c.name_filter, "add");
  EXPECT_EQ(c.default_timeout, 2.5);
  EXPECT_EQ(c.report_path, std::filesystem::path("r.json"));
  EXPECT_TRUE(c.verbose);
  EXPECT_TRUE(c.list_only);
}

TEST(Cli, InterpreterFlagAndEnvironmentFallback) {
  setenv("ITEST_INTERPRETER", "python3 -X dev", 1);
  EXPECT_EQ(parse({}).interpreter_command, (std::vector<std::string>{"python3", "-X", "dev"}));
  EXPECT_EQ(parse({"--interpreter", "/opt/py -I"}).interpreter_command, (std::vector<std::string>{"/opt/py", "-I"}));
  unsetenv("ITEST_INTERPRETER");
}

TEST(Cli, UsageErrorsExitWithTwo) {
  TempDir dir;
  write_file(dir / "a.py", kPassing);
  std::string file = (dir / "a.py").string();
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"--no-such-flag", file},
           {"-n", "zero", file},
           {"-n", "0", file},
           {"--timeout", "-1", file},
           {"--timeout", "soon", file},
           {(dir / "missing.py").string()},
           {"--interpreter", " ", file},
       }) {
    CliRun r = run(args);
    EXPECT_EQ(r.code, 2) << args[0];
    EXPECT_NE(r.err.find("error"), std::string::npos) << args[0];
  }
}

TEST(Cli, UnwritableReportExitsWithTwo) {
  TempDir dir;
  write_file(dir / "a.py", kPassing);
  CliRun r = run({"--interpreter", ITEST_PYTHON, "--report", "/nonexistent/dir/r.json", (dir / "a.py").string()});
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, VersionAndHelp) {
  CliRun v = run({"--version"});
  EXPECT_EQ(v.code, 0);
  EXPECT_NE(v.out.find(kToolVersion), std::string::npos);
  CliRun h = run({"--help"});
  EXPECT_EQ(h.code, 0);
  EXPECT_NE(h.out.find("--inlinetest-group"), std::string::npos);
  EXPECT_NE(h.out.find("--list-only"), std::string::npos);
}

TEST(Cli, RunsAFileAndWritesTheReport) {
  TempDir dir;
  write_file(dir / "a.py", kPassing);
  CliRun r = run({"--interpreter", ITEST_PYTHON, "--report", (dir / "r.json").string(), (dir / "a.py").string()});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("1 passed"), std::string::npos);
  auto j = nlohmann::json::parse(read_file(dir / "r.json"));
  EXPECT_EQ(j["cases"][0]["status"], "PASSED");
}

TEST(Cli, EmptySelectionIsAVacuousPass) {
  TempDir dir;
  write_file(dir / "a.py", kPassing);
  CliRun r = run({"--interpreter", ITEST_PYTHON, "-k", "nothing-matches", (dir / "a.py").string()});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("0 passed, 0 failed, 0 skipped, 0 timeout, 0 errors"), std::string::npos);
}

TEST(Cli, ListOnlyNeverSpawnsTheInterpreter) {
  TempDir dir;
  write_file(dir / "a.py", kPassing);
  write_file(dir / "b.py", "from inline import itest\nx = 1\nitest().given(x, 1)\n");
  std::string marker = (dir / "spawned").string();
  CliRun r = run({"--interpreter", "/bin/sh -c 'touch " + marker + "'", "--list-only", dir.path().string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("a.py::4"), std::string::npos);
  EXPECT_NE(r.out.find("NO_CHECK"), std::string::npos);
  EXPECT_NE(r.out.find("1 inline test collected, 1 collection error"), std::string::npos);
  EXPECT_FALSE(std::filesystem::exists(marker));

  CliRun clean = run({"--list-only", (dir / "a.py").string()});
  EXPECT_EQ(clean.code, 0);
}
