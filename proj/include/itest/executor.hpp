#pragma once

// Selects, orders and runs test cases in interpreter subprocesses.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "itest/assembler.hpp"
#include "itest/config.hpp"
#include "itest/subprocess.hpp"

namespace itest {

enum class Status { Passed, Failed, SkippedDisabled, SkippedAssumption, Timeout, Error };

std::string_view to_string(Status status);

struct FailureRecord {
  std::string kind;
  std::string check;
  std::string actual_expr;
  std::string actual_repr;
  std::optional<std::string> expected_expr;
  std::optional<std::string> expected_repr;
  int repetition = 0;
};

struct TestOutcome {
  std::string case_id;
  std::string display_name;
  std::string path;
  int line = 0;
  std::size_t param_index = 0;
  std::vector<std::string> tags;
  Status status = Status::Error;
  double duration_s = 0;
  int repetitions_run = 0;
  std::optional<FailureRecord> failure;
  std::optional<std::string> error_detail;
};

struct Selection {
  std::vector<TestCase> runnable;
  std::vector<TestOutcome> skipped;  // selected but disabled
};

// True when the case matches the group tags and the name filter.
bool is_selected(const TestCase& test_case, const RunConfig& config);
Selection select(const std::vector<TestCase>& cases, const RunConfig& config);

// Stable bucket sort by the first matching order tag; the default order
// (path, line, parameter index) applies within each bucket.
std::vector<TestCase> order(std::vector<TestCase> cases, const RunConfig& config);

// Writes generated programs into one directory, one file per case.
class ProgramStore {
 public:
  // Uses `directory` when given (kept afterwards), else a fresh temporary
  // directory removed on destruction.
  explicit ProgramStore(std::optional<std::filesystem::path> directory = {});
  ~ProgramStore();
  ProgramStore(const ProgramStore&) = delete;
  ProgramStore& operator=(const ProgramStore&) = delete;

  std::filesystem::path write(const TestCase& test_case);
  const std::filesystem::path& directory() const { return directory_; }
  // True when the directory is a fresh temporary one, named differently on
  // every run.
  bool is_temporary() const { return owned_; }

 private:
  std::filesystem::path directory_;
  bool owned_ = false;
  std::vector<std::string> used_names_;
};

std::string program_file_name(std::string_view case_id);

// Extra import directories for running a case, derived from its file.
std::vector<std::string> import_paths_for(const std::string& subject_path);

// Runs one case `repeated` times, stopping at the first result that is not
// a pass.
TestOutcome run_case(const TestCase& test_case, const std::filesystem::path& program,
                     const std::filesystem::path& working_directory, const RunConfig& config);

// Runs cases on `parallelism` workers; outcomes come back in input order.
// Paths into a temporary store appear in error details as `<itest-run>`.
std::vector<TestOutcome> run_suite(const std::vector<TestCase>& cases, ProgramStore& store, const RunConfig& config);

// Classifies one finished interpreter run.
TestOutcome classify(const TestCase& test_case, const ProcessResult& result, const RunConfig& config);

TestOutcome skipped_outcome(const TestCase& test_case);

}  // namespace itest
