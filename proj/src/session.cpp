#include "itest/session.hpp"

#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "itest/discovery.hpp"
#include "itest/executor.hpp"
#include "itest/finder.hpp"
#include "itest/subprocess.hpp"
#include "itest/text.hpp"

namespace itest {
namespace {

// Two inline tests on one line share a location; later ones get a suffix.
void make_ids_unique(std::vector<TestCase>& cases) {
  std::map<std::string, std::set<int>> columns;
  for (const auto& c : cases) columns[case_id({c.path, c.line, 0}, std::nullopt)].insert(c.decl->location.col);
  for (auto& c : cases) {
    const auto& cols = columns[case_id({c.path, c.line, 0}, std::nullopt)];
    if (cols.size() < 2) continue;
    auto rank = std::distance(cols.begin(), cols.find(c.decl->location.col));
    if (rank == 0) continue;
    std::string base = case_id({c.path, c.line, 0}, std::nullopt);
    std::string suffixed = fmt::format("{}#{}", base, rank + 1);
    if (c.display_name == c.id) c.display_name.replace(0, base.size(), suffixed);
    c.id.replace(0, base.size(), suffixed);
  }
}

void collect_file(const SourceFile& source, const RunConfig& config, Collection& out) {
  CollectedFile file;
  file.path = source.path();
  std::vector<RawInlineTest> raws = find_inline_tests(source);
  if (raws.empty()) {
    out.files.push_back(std::move(file));
    return;
  }
  PackageInfo package = package_info(source.path());
  ModuleIndex index(source, package.package);
  const auto& body = source.module().body;
  for (std::size_t i = 0; i < body.size(); ++i) {
    const auto& e = index.entries()[i];
    if (e.is_import && !e.text.empty()) file.imports.push_back({body[i]->span.begin.line, e.text});
  }
  for (const auto& raw : raws) {
    try {
      auto decl = std::make_shared<InlineTestDecl>(extract_declaration(raw, source));
      std::size_t n = validate_parameterization(*decl);
      std::vector<std::string> support = resolve_dependencies(*decl, index);
      for (const auto& variable : unread_given_variables(*decl)) {
        out.warnings.push_back(
            {decl->location, fmt::format("given variable `{}` is not read by the target statement", variable)});
      }
      auto cases = expand(decl, n, support, config.default_timeout);
      file.test_count += cases.size();
      for (auto& c : cases) out.cases.push_back(std::move(c));
    } catch (const CollectionFailure& failure) {
      out.errors.push_back(failure.to_error());
    }
  }
  out.files.push_back(std::move(file));
}

constexpr std::string_view kProbeScript = R"PY(import json
import sys

with open(sys.argv[1], encoding="utf-8") as handle:
    checks = json.load(handle)
for path, line, statement in checks:
    try:
        exec(compile(statement, path, "exec"), {"__name__": "__itest_probe__"})
    except BaseException as error:
        message = "%s: %s" % (type(error).__name__, error)
        print(json.dumps({"path": path, "line": line, "error": message}), flush=True)
)PY";

}  // namespace

Collection collect(const RunConfig& config) {
  std::vector<std::string> paths = resolve_paths(config);
  Collection out;
  std::vector<LoadResult> loaded = load_sources(paths, resolve_parallelism(config.parallelism));
  for (auto& result : loaded) {
    if (auto* error = std::get_if<CollectionError>(&result)) {
      out.errors.push_back(*error);
      out.files.push_back({error->path, {}, 0});
      continue;
    }
    collect_file(std::get<SourceFile>(result), config, out);
  }
  make_ids_unique(out.cases);
  return out;
}

void probe_imports(Collection& collection, const RunConfig& config) {
  // Files sharing an import path are probed by one interpreter process.
  std::map<std::vector<std::string>, nlohmann::json> groups;
  for (const auto& f : collection.files) {
    if (f.test_count == 0) continue;
    for (const auto& imp : f.imports) {
      groups[import_paths_for(f.path)].push_back({f.path, imp.line, imp.text});
    }
  }
  std::map<std::string, std::pair<int, std::string>> broken;  // first failure per file
  std::string work_dir = std::filesystem::temp_directory_path().string();
  for (const auto& [paths, checks] : groups) {
    std::string list_path = (std::filesystem::temp_directory_path() / "itest-probe-XXXXXX").string();
    int fd = mkstemp(list_path.data());
    if (fd < 0) continue;
    std::string payload = checks.dump();
    bool written = ::write(fd, payload.data(), payload.size()) == static_cast<ssize_t>(payload.size());
    ::close(fd);
    ProcessOptions options;
    options.argv = config.interpreter_command;
    options.argv.insert(options.argv.end(), {"-c", std::string(kProbeScript), list_path});
    options.working_directory = work_dir;
    options.environment = interpreter_environment(paths);
    options.timeout_s = 300;
    ProcessResult result = written ? run_process(options) : ProcessResult{};
    std::filesystem::remove(list_path);
    if (!result.started || result.timed_out) continue;
    for (const auto& line : text::split_lines(result.out)) {
      try {
        auto row = nlohmann::json::parse(line);
        std::string path = row.at("path");
        if (!broken.count(path)) broken[path] = {row.at("line").get<int>(), row.at("error").get<std::string>()};
      } catch (const nlohmann::json::exception&) {
        // Output printed by an imported module.
      }
    }
  }
  if (broken.empty()) return;
  for (const auto& [path, failure] : broken) {
    CollectionError e;
    e.path = path;
    e.line = failure.first;
    if (config.ignore_import_errors) {
      e.reason = reason::kImportSkipped;
      e.message = "tests skipped because an import failed: " + failure.second;
      e.fatal = false;
    } else {
      e.reason = reason::kImportError;
      e.message = "import failed: " + failure.second;
    }
    collection.errors.push_back(std::move(e));
  }
  std::erase_if(collection.cases, [&](const TestCase& c) { return broken.count(c.path) != 0; });
  std::stable_sort(collection.errors.begin(), collection.errors.end(),
                   [](const CollectionError& a, const CollectionError& b) {
                     return std::tie(a.path, a.line) < std::tie(b.path, b.line);
                   });
}

Report run_session(const RunConfig& config) {
  auto started = std::chrono::steady_clock::now();
  Collection collection = collect(config);
  probe_imports(collection, config);

  Report report;
  report.config = config;
  report.files_scanned = collection.files.size();
  report.collection_errors = collection.errors;
  report.warnings = collection.warnings;

  Selection selection = select(collection.cases, config);
  std::vector<TestCase> runnable = order(std::move(selection.runnable), config);
  ProgramStore store(config.keep_programs);
  std::vector<TestOutcome> ran = run_suite(runnable, store, config);

  // Disabled cases take their place in the established order.
  std::vector<TestCase> everything = runnable;
  std::map<std::string, TestOutcome> by_id;
  for (auto& o : ran) by_id.emplace(o.case_id, std::move(o));
  for (auto& o : selection.skipped) by_id.emplace(o.case_id, std::move(o));
  for (const auto& c : collection.cases) {
    if (c.disabled && by_id.count(c.id)) everything.push_back(c);
  }
  for (const auto& c : order(std::move(everything), config)) report.outcomes.push_back(std::move(by_id.at(c.id)));
  report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

}  // namespace itest
