#pragma once

// Turns path arguments into the subject files to scan and loads them.

#include <string>
#include <variant>
#include <vector>

#include "itest/config.hpp"
#include "itest/diagnostics.hpp"
#include "itest/source.hpp"

namespace itest {

class NonexistentPath : public UsageError {
 public:
  explicit NonexistentPath(const std::string& path)
      : UsageError("file or directory not found: " + path), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Directories are searched recursively for `.py` files, skipping hidden
// directories and visiting each real directory once. Files named
// explicitly are kept whatever their extension. The result is sorted and
// free of duplicates. Throws NonexistentPath.
std::vector<std::string> resolve_paths(const RunConfig& config);

// Lexically normalized form used for every path shown to the user.
std::string display_path(const std::string& path);

using LoadResult = std::variant<SourceFile, CollectionError>;

// Reads, decodes and parses one file. Problems are returned as a
// collection error rather than thrown.
LoadResult load_source(const std::string& path);

// Same as load_source for text already in memory.
LoadResult load_source_text(const std::string& path, std::string bytes);

// Loads files on up to `workers` threads; results keep the order of `paths`.
std::vector<LoadResult> load_sources(const std::vector<std::string>& paths, unsigned workers);

}  // namespace itest
