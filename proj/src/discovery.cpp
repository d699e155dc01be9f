#include "itest/discovery.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>

#include "itest/parallel.hpp"
#include "itest/python/ast.hpp"
#include "itest/text.hpp"

namespace fs = std::filesystem;

namespace itest {
namespace {

bool is_hidden(const fs::path& p) {
  std::string name = p.filename().string();
  return name.size() > 1 && name[0] == '.' && name != "..";
}

void walk(const fs::path& dir, std::set<fs::path>& seen_dirs, std::vector<std::string>& out) {
  std::error_code ec;
  fs::path real = fs::weakly_canonical(dir, ec);
  if (ec) real = dir;
  if (!seen_dirs.insert(real).second) return;
  std::vector<fs::directory_entry> entries;
  for (fs::directory_iterator it(dir, fs::directory_options::skip_permission_denied, ec), end; !ec && it != end;
       it.increment(ec)) {
    entries.push_back(*it);
  }
  for (const auto& entry : entries) {
    std::error_code type_ec;
    if (entry.is_directory(type_ec)) {
      if (!is_hidden(entry.path())) walk(entry.path(), seen_dirs, out);
    } else if (entry.is_regular_file(type_ec) && entry.path().extension() == ".py") {
      out.push_back(display_path(entry.path().string()));
    }
  }
}

CollectionError file_error(const std::string& path, std::optional<int> line, const char* reason,
                           std::string message) {
  return {path, line, reason, std::move(message), true};
}

}  // namespace

std::string display_path(const std::string& path) {
  std::string normal = fs::path(path).lexically_normal().generic_string();
  while (normal.size() > 2 && normal.compare(0, 2, "./") == 0) normal.erase(0, 2);
  if (normal.size() > 1 && normal.back() == '/') normal.pop_back();
  return normal;
}

std::vector<std::string> resolve_paths(const RunConfig& config) {
  for (const auto& p : config.paths) {
    std::error_code ec;
    if (!fs::exists(p, ec)) throw NonexistentPath(p);
  }
  std::vector<std::string> files;
  std::set<fs::path> seen_dirs;
  for (const auto& p : config.paths) {
    if (fs::is_directory(p)) {
      walk(p, seen_dirs, files);
    } else {
      files.push_back(display_path(p));
    }
  }
  std::sort(files.begin(), files.end());
  files.erase(std::unique(files.begin(), files.end()), files.end());
  return files;
}

LoadResult load_source_text(const std::string& path, std::string bytes) {
  if (bytes.size() >= 3 && bytes.compare(0, 3, "\xEF\xBB\xBF") == 0) bytes.erase(0, 3);
  if (!text::is_valid_utf8(bytes)) {
    return file_error(path, std::nullopt, reason::kDecodeError, "file is not valid UTF-8");
  }
  // Universal newlines, as the interpreter reads source files.
  std::string text;
  text.reserve(bytes.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    if (bytes[i] == '\r') {
      text += '\n';
      if (i + 1 < bytes.size() && bytes[i + 1] == '\n') ++i;
    } else {
      text += bytes[i];
    }
  }
  try {
    return SourceFile::parse(path, std::move(text));
  } catch (const py::SyntaxError& e) {
    return file_error(path, e.where().line, reason::kSyntaxError, e.message());
  }
}

LoadResult load_source(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return file_error(path, std::nullopt, reason::kReadError, "cannot open file");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) return file_error(path, std::nullopt, reason::kReadError, "cannot read file");
  return load_source_text(path, std::move(bytes));
}

std::vector<LoadResult> load_sources(const std::vector<std::string>& paths, unsigned workers) {
  std::vector<std::optional<LoadResult>> slots(paths.size());
  parallel_for(paths.size(), workers, [&](std::size_t i) { slots[i] = load_source(paths[i]); });
  std::vector<LoadResult> out;
  out.reserve(paths.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace itest
