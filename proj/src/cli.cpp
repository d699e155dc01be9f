#include "itest/cli.hpp"

#include <cstdlib>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "itest/executor.hpp"
#include "itest/reporter.hpp"
#include "itest/session.hpp"

namespace itest {
namespace {

constexpr const char* kDescription =
    "Runs inline tests written with itest() in Python source files.\n"
    "Each test runs as a standalone program in its own interpreter process.\n"
    "Only inline tests are run; ordinary unit tests in the same files are ignored.";

std::vector<std::string> split_command(const std::string& command) {
  std::vector<std::string> parts;
  std::istringstream in(command);
  std::string word;
  while (in >> word) parts.push_back(word);
  return parts;
}

}  // namespace

std::optional<RunConfig> parse_args(const std::vector<std::string>& args, std::ostream& out) {
  CLI::App app(kDescription, "itest-runner");
  app.set_version_flag("--version", std::string("itest-runner ") + kToolVersion);

  RunConfig config;
  std::vector<std::string> paths;
  std::string workers = "1";
  std::optional<double> timeout;
  std::string interpreter;
  std::string report;
  std::string keep;
  std::string name_filter;

  app.add_option("paths", paths, "Files or directories to scan (default: .)");
  app.add_option("--group,--inlinetest-group", config.group_tags, "Run only tests with this tag (repeatable)")
      ->allow_extra_args(false)
      ->type_name("TAG");
  app.add_option("--order,--inlinetest-order", config.order_tags, "Run tests with this tag first (repeatable)")
      ->allow_extra_args(false)
      ->type_name("TAG");
  app.add_option("-k", name_filter, "Run only tests whose name contains this text")->type_name("TEXT");
  app.add_option("-n", workers, "Worker processes: a positive number or 'auto' (default: 1)")->type_name("N|auto");
  app.add_flag("--ignore-import-errors,--inlinetest-ignore-import-errors", config.ignore_import_errors,
               "Skip files whose imports fail instead of reporting an error");
  app.add_option("--timeout", timeout, "Default time limit in seconds for tests that declare none")
      ->type_name("SECONDS");
  app.add_option("--interpreter", interpreter,
                 "Interpreter command (default: $ITEST_INTERPRETER, else python3)")
      ->type_name("CMD");
  app.add_option("--report", report, "Write a JSON report to this path")->type_name("PATH");
  app.add_flag("--list-only", config.list_only, "List the collected tests without running them");
  app.add_flag("-v,--verbose", config.verbose, "Show durations and full error output");
  app.add_option("--keep-programs", keep, "Write generated test programs to this directory and keep them")
      ->type_name("DIR");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return std::nullopt;
  } catch (const CLI::CallForVersion&) {
    out << "itest-runner " << kToolVersion << "\n";
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  if (!paths.empty()) config.paths = paths;
  if (app.count("-k")) config.name_filter = name_filter;
  if (workers == "auto") {
    config.parallelism = 0;
  } else {
    std::size_t used = 0;
    long n = 0;
    try {
      n = std::stol(workers, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != workers.size() || n < 1 || n > 1024) {
      throw UsageError(fmt::format("-n: expected a positive number or 'auto', got '{}'", workers));
    }
    config.parallelism = static_cast<unsigned>(n);
  }
  if (timeout) {
    if (!(*timeout > 0)) throw UsageError(fmt::format("--timeout: expected a positive number, got {}", *timeout));
    config.default_timeout = timeout;
  }
  if (interpreter.empty()) {
    if (const char* env = std::getenv("ITEST_INTERPRETER"); env && *env) interpreter = env;
  }
  if (!interpreter.empty()) {
    config.interpreter_command = split_command(interpreter);
    if (config.interpreter_command.empty()) throw UsageError("--interpreter: empty command");
  }
  if (!report.empty()) config.report_path = report;
  if (!keep.empty()) config.keep_programs = keep;
  std::vector<std::string> distinct;
  for (const auto& t : config.order_tags) {
    if (std::find(distinct.begin(), distinct.end(), t) == distinct.end()) distinct.push_back(t);
  }
  config.order_tags = std::move(distinct);
  return config;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::optional<RunConfig> config;
  try {
    config = parse_args(args, out);
    if (!config) return 0;
    if (config->list_only) {
      Collection collection = collect(*config);
      std::vector<TestCase> listed;
      for (auto& c : collection.cases) {
        if (is_selected(c, *config)) listed.push_back(std::move(c));
      }
      out << render_listing(order(std::move(listed), *config), collection.errors, collection.warnings);
      for (const auto& e : collection.errors) {
        if (e.fatal) return 1;
      }
      return 0;
    }
    Report report = run_session(*config);
    out << render_terminal(report, config->verbose);
    out.flush();
    if (config->report_path) emit_json(report, *config->report_path);
    return exit_code(report);
  } catch (const UsageError& e) {
    err << "itest-runner: error: " << e.what() << "\n";
    return 2;
  } catch (const ReportWriteError& e) {
    err << "itest-runner: error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace itest
