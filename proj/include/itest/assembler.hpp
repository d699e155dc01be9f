#pragma once

// Expands declarations into test cases and generates a standalone program
// for each.

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "itest/diagnostics.hpp"
#include "itest/extractor.hpp"
#include "itest/source.hpp"

namespace itest {

// Markers printed by generated programs on standard output.
namespace sentinel {
inline constexpr std::string_view kPass = "ITEST-PASS";
inline constexpr std::string_view kSkipAssumption = "ITEST-SKIP-ASSUMPTION";
inline constexpr std::string_view kFailPrefix = "ITEST-FAIL ";
}  // namespace sentinel

struct TestProgram {
  std::string source_file;  // absolute path bound to __file__
  std::vector<std::string> support_statements;
  std::vector<std::string> input_statements;
  std::string target_text;
  std::vector<int> target_string_lines;
  int target_column = 0;
  std::vector<std::string> assertion_statements;
  std::optional<std::string> assumption_expr;
};

struct TestCase {
  std::string id;
  std::string display_name;
  std::shared_ptr<const InlineTestDecl> decl;
  std::size_t param_index = 0;
  std::string path;
  int line = 0;
  std::vector<std::string> tags;
  bool disabled = false;
  int repeated = 1;
  std::optional<double> timeout;
  TestProgram program;
};

class UnresolvedNameError : public CollectionFailure {
 public:
  UnresolvedNameError(Location where, std::string name, const std::string& test_id)
      : CollectionFailure(reason::kUnresolvedName, std::move(where),
                          "name `" + name + "` used by " + test_id +
                              " is not defined at module level; provide it with given()"),
        name_(std::move(name)) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

// Top-level statements of a subject file, indexed by the names they bind.
// When the file belongs to a package, `package` is its dotted package name
// and relative imports are rewritten to absolute ones.
class ModuleIndex {
 public:
  explicit ModuleIndex(const SourceFile& source, std::string package = {});

  struct Entry {
    std::string text;  // ready to paste at top level
    std::vector<std::string> bound;
    std::vector<std::string> free;  // builtins excluded
    bool is_import = false;
    bool is_star_import = false;
    bool is_future_import = false;  // always copied
  };

  const std::vector<Entry>& entries() const { return entries_; }
  const SourceFile& source() const { return source_; }

 private:
  SourceFile source_;
  std::vector<Entry> entries_;  // one per module-level statement, in order
};

// Dotted package name for a file, found by walking up through directories
// that contain `__init__.py`, and the directory the package is imported
// from. An empty package means the file is a plain script.
struct PackageInfo {
  std::string package;
  std::string import_root;
};
PackageInfo package_info(const std::string& path);

// Statement texts copied from the subject file that the test body needs,
// in source order. Throws UnresolvedNameError.
std::vector<std::string> resolve_dependencies(const InlineTestDecl& decl, const ModuleIndex& index);

// Names read by the assembled test body (assumptions, inputs, target,
// checks) that neither the inputs nor the target bind. Builtins excluded.
std::vector<std::string> body_free_names(const InlineTestDecl& decl);

// Test case identity for a declaration at `location`.
std::string case_id(const Location& location, std::optional<std::size_t> param_index);

// One test case per parameter index, each with its program filled in.
std::vector<TestCase> expand(std::shared_ptr<const InlineTestDecl> decl, std::size_t n,
                             const std::vector<std::string>& support, std::optional<double> default_timeout = {});

std::string generate_program(const TestCase& test_case);

}  // namespace itest
