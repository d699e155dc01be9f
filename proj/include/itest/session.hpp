#pragma once

// The whole pipeline: discovery, finding, extraction, assembly, execution
// and reporting.

#include <string>
#include <vector>

#include "itest/assembler.hpp"
#include "itest/config.hpp"
#include "itest/diagnostics.hpp"
#include "itest/reporter.hpp"

namespace itest {

struct CollectedFile {
  std::string path;
  // Module-level imports, for the import probe.
  struct Import {
    int line;
    std::string text;
  };
  std::vector<Import> imports;
  std::size_t test_count = 0;
};

struct Collection {
  std::vector<CollectedFile> files;
  std::vector<TestCase> cases;
  std::vector<CollectionError> errors;
  std::vector<Warning> warnings;
};

// Static analysis only; nothing is executed. Throws UsageError.
Collection collect(const RunConfig& config);

// Tries every module-level import of files with tests in the configured
// interpreter. Files whose imports fail lose their tests and gain a
// collection error (non-fatal with ignore_import_errors).
void probe_imports(Collection& collection, const RunConfig& config);

// Runs everything and returns the report. Throws UsageError.
Report run_session(const RunConfig& config);

}  // namespace itest
