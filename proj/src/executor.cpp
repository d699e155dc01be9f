#include "itest/executor.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "itest/parallel.hpp"
#include "itest/subprocess.hpp"

namespace fs = std::filesystem;

namespace itest {
namespace {

TestOutcome blank_outcome(const TestCase& c) {
  TestOutcome o;
  o.case_id = c.id;
  o.display_name = c.display_name;
  o.path = c.path;
  o.line = c.line;
  o.param_index = c.param_index;
  o.tags = c.tags;
  return o;
}

// Last line of output that carries a sentinel.
std::string_view last_sentinel(std::string_view out) {
  std::size_t end = out.size();
  while (end > 0) {
    std::size_t begin = out.rfind('\n', end - 1);
    begin = begin == std::string_view::npos ? 0 : begin + 1;
    std::string_view line = out.substr(begin, end - begin);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.rfind("ITEST-", 0) == 0) return line;
    if (begin == 0) break;
    end = begin - 1;
  }
  return {};
}

std::string last_lines(std::string_view text, std::size_t count) {
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.remove_suffix(1);
  std::size_t pos = text.size();
  for (std::size_t n = 0; n < count && pos != std::string_view::npos && pos > 0; ++n) {
    pos = text.rfind('\n', pos - 1);
  }
  if (pos == std::string_view::npos || pos == 0) return std::string(text);
  return std::string(text.substr(pos + 1));
}

}  // namespace

std::string_view to_string(Status status) {
  switch (status) {
    case Status::Passed: return "PASSED";
    case Status::Failed: return "FAILED";
    case Status::SkippedDisabled: return "SKIPPED_DISABLED";
    case Status::SkippedAssumption: return "SKIPPED_ASSUMPTION";
    case Status::Timeout: return "TIMEOUT";
    case Status::Error: return "ERROR";
  }
  return "ERROR";
}

bool is_selected(const TestCase& test_case, const RunConfig& config) {
  if (!config.group_tags.empty()) {
    bool tagged = std::any_of(test_case.tags.begin(), test_case.tags.end(), [&](const std::string& t) {
      return std::find(config.group_tags.begin(), config.group_tags.end(), t) != config.group_tags.end();
    });
    if (!tagged) return false;
  }
  return !config.name_filter || test_case.display_name.find(*config.name_filter) != std::string::npos;
}

Selection select(const std::vector<TestCase>& cases, const RunConfig& config) {
  Selection s;
  for (const auto& c : cases) {
    if (!is_selected(c, config)) continue;
    if (c.disabled) {
      s.skipped.push_back(skipped_outcome(c));
    } else {
      s.runnable.push_back(c);
    }
  }
  return s;
}

TestOutcome skipped_outcome(const TestCase& test_case) {
  TestOutcome o = blank_outcome(test_case);
  o.status = Status::SkippedDisabled;
  return o;
}

std::vector<TestCase> order(std::vector<TestCase> cases, const RunConfig& config) {
  auto bucket = [&](const TestCase& c) {
    for (std::size_t k = 0; k < config.order_tags.size(); ++k) {
      if (std::find(c.tags.begin(), c.tags.end(), config.order_tags[k]) != c.tags.end()) return k;
    }
    return config.order_tags.size();
  };
  std::stable_sort(cases.begin(), cases.end(), [&](const TestCase& a, const TestCase& b) {
    auto ka = std::make_tuple(bucket(a), std::cref(a.path), a.line, a.param_index);
    auto kb = std::make_tuple(bucket(b), std::cref(b.path), b.line, b.param_index);
    return ka < kb;
  });
  return cases;
}

std::string program_file_name(std::string_view case_id) {
  std::string name;
  for (char c : case_id) {
    bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
    name += keep ? c : '_';
  }
  return name;
}

ProgramStore::ProgramStore(std::optional<fs::path> directory) {
  if (directory) {
    directory_ = *directory;
    fs::create_directories(directory_);
    return;
  }
  std::string pattern = (fs::temp_directory_path() / "itest-run-XXXXXX").string();
  if (!mkdtemp(pattern.data())) throw std::runtime_error("cannot create a temporary directory");
  directory_ = pattern;
  owned_ = true;
}

ProgramStore::~ProgramStore() {
  if (owned_) {
    std::error_code ec;
    fs::remove_all(directory_, ec);
  }
}

fs::path ProgramStore::write(const TestCase& test_case) {
  std::string base = program_file_name(test_case.id);
  std::string name = base + ".py";
  for (int n = 2; std::find(used_names_.begin(), used_names_.end(), name) != used_names_.end(); ++n) {
    name = fmt::format("{}_{}.py", base, n);
  }
  used_names_.push_back(name);
  fs::path path = directory_ / name;
  std::ofstream out(path, std::ios::binary);
  out << generate_program(test_case);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return path;
}

std::vector<std::string> import_paths_for(const std::string& subject_path) {
  std::error_code ec;
  std::string dir = fs::absolute(subject_path, ec).parent_path().lexically_normal().string();
  std::vector<std::string> paths{dir};
  PackageInfo info = package_info(subject_path);
  if (!info.package.empty() && info.import_root != dir) paths.push_back(info.import_root);
  return paths;
}

TestOutcome classify(const TestCase& test_case, const ProcessResult& result, const RunConfig& config) {
  TestOutcome o = blank_outcome(test_case);
  o.duration_s = result.seconds;
  if (!result.started) {
    o.status = Status::Error;
    o.error_detail = fmt::format("cannot run interpreter `{}`: {}", fmt::join(config.interpreter_command, " "),
                                 result.spawn_error);
    return o;
  }
  if (result.timed_out) {
    o.status = Status::Timeout;
    return o;
  }
  std::string_view line = last_sentinel(result.out);
  if (line == sentinel::kPass && result.exit_code == 0) {
    o.status = Status::Passed;
    return o;
  }
  if (line == sentinel::kSkipAssumption && result.exit_code == 0) {
    o.status = Status::SkippedAssumption;
    return o;
  }
  if (line.rfind(sentinel::kFailPrefix, 0) == 0) {
    try {
      auto record = nlohmann::json::parse(line.substr(sentinel::kFailPrefix.size()));
      FailureRecord f;
      f.kind = record.at("kind").get<std::string>();
      f.check = record.value("check", "");
      f.actual_expr = record.at("actual_expr").get<std::string>();
      f.actual_repr = record.at("actual_repr").get<std::string>();
      if (record.contains("expected_repr")) {
        f.expected_expr = record.value("expected_expr", "");
        f.expected_repr = record["expected_repr"].get<std::string>();
      }
      o.status = Status::Failed;
      o.failure = std::move(f);
      return o;
    } catch (const nlohmann::json::exception&) {
      // Not one of ours; treated as an error below.
    }
  }
  o.status = Status::Error;
  std::string detail = last_lines(result.err, 20);
  if (detail.empty()) {
    detail = result.term_signal ? fmt::format("interpreter terminated by signal {}", result.term_signal)
                                : fmt::format("interpreter exited with code {} without reporting a result",
                                              result.exit_code);
  }
  o.error_detail = detail;
  return o;
}

TestOutcome run_case(const TestCase& test_case, const fs::path& program, const fs::path& working_directory,
                     const RunConfig& config) {
  // Each repetition starts in an empty directory of its own, so files one
  // case leaves behind are never seen by another.
  const fs::path case_directory = working_directory / (program.stem().string() + ".cwd");
  ProcessOptions options;
  options.argv = config.interpreter_command;
  options.argv.push_back(program.string());
  options.working_directory = case_directory.string();
  options.environment = interpreter_environment(import_paths_for(test_case.path));
  options.timeout_s = test_case.timeout;

  TestOutcome outcome = blank_outcome(test_case);
  double total = 0;
  std::error_code ec;
  for (int rep = 0; rep < std::max(1, test_case.repeated); ++rep) {
    fs::remove_all(case_directory, ec);
    fs::create_directories(case_directory, ec);
    ProcessResult result = run_process(options);
    total += result.seconds;
    outcome = classify(test_case, result, config);
    outcome.repetitions_run = rep + 1;
    if (outcome.failure) outcome.failure->repetition = rep;
    if (outcome.status != Status::Passed) break;
  }
  fs::remove_all(case_directory, ec);
  outcome.duration_s = total;
  return outcome;
}

std::vector<TestOutcome> run_suite(const std::vector<TestCase>& cases, ProgramStore& store, const RunConfig& config) {
  std::vector<fs::path> programs;
  programs.reserve(cases.size());
  for (const auto& c : cases) programs.push_back(store.write(c));
  std::vector<TestOutcome> outcomes(cases.size());
  parallel_for(cases.size(), resolve_parallelism(config.parallelism), [&](std::size_t i) {
    outcomes[i] = run_case(cases[i], programs[i], store.directory(), config);
    if (store.is_temporary() && outcomes[i].error_detail) {
      std::string& detail = *outcomes[i].error_detail;
      const std::string from = store.directory().string();
      for (std::size_t at = detail.find(from); at != std::string::npos; at = detail.find(from, at)) {
        detail.replace(at, from.size(), "<itest-run>");
      }
    }
  });
  return outcomes;
}

}  // namespace itest
