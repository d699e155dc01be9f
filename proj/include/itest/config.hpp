#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace itest {

inline constexpr const char* kToolVersion = "0.3.0";

struct RunConfig {
  std::vector<std::string> paths{"."};
  std::vector<std::string> group_tags;
  std::vector<std::string> order_tags;
  std::optional<std::string> name_filter;
  // 0 means "auto": resolved to the logical CPU count by resolve_parallelism().
  unsigned parallelism = 1;
  bool ignore_import_errors = false;
  std::optional<double> default_timeout;
  std::vector<std::string> interpreter_command{"python3"};
  std::optional<std::filesystem::path> report_path;
  bool list_only = false;
  bool verbose = false;
  // Write generated programs here and keep them; a temporary directory is
  // used and removed when unset.
  std::optional<std::filesystem::path> keep_programs;
};

// Bad flags, nonexistent paths: reported before any test runs, exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

unsigned resolve_parallelism(unsigned requested);

}  // namespace itest
