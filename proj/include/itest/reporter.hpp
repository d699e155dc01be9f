#pragma once

// Terminal and JSON renderings of a finished run, and the exit code.

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "itest/assembler.hpp"
#include "itest/config.hpp"
#include "itest/diagnostics.hpp"
#include "itest/executor.hpp"

namespace itest {

inline constexpr const char* kReportSchemaVersion = "1";

struct Totals {
  std::size_t passed = 0;
  std::size_t failed = 0;
  std::size_t skipped_disabled = 0;
  std::size_t skipped_assumption = 0;
  std::size_t timeout = 0;
  std::size_t error = 0;
  std::size_t collection_errors = 0;  // fatal entries only

  std::size_t skipped() const { return skipped_disabled + skipped_assumption; }
  std::size_t cases() const { return passed + failed + skipped() + timeout + error; }
};

struct Report {
  RunConfig config;
  std::size_t files_scanned = 0;
  std::vector<TestOutcome> outcomes;
  std::vector<CollectionError> collection_errors;
  std::vector<Warning> warnings;
  double wall_time_s = 0;

  Totals totals() const;
};

class ReportWriteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string render_terminal(const Report& report, bool verbose);

// `--list-only` output: one line per collected case, then any problems.
std::string render_listing(const std::vector<TestCase>& cases, const std::vector<CollectionError>& errors,
                           const std::vector<Warning>& warnings);

std::string summary_line(const Report& report);

nlohmann::json to_json(const Report& report);

// Throws ReportWriteError.
void emit_json(const Report& report, const std::filesystem::path& path);

int exit_code(const Report& report);

}  // namespace itest
