#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "itest/python/ast.hpp"

namespace itest {

// A parsed subject file. Copies share the syntax tree, so pointers into it
// stay valid for as long as any copy is alive.
class SourceFile {
 public:
  // Throws py::SyntaxError.
  static SourceFile parse(std::string path, std::string text);

  const std::string& path() const { return path_; }
  const std::string& text() const { return *text_; }
  const py::Module& module() const { return *module_; }

  // Exact source text covered by a span.
  std::string_view slice(const py::Span& span) const;
  std::size_t offset(py::Pos pos) const;
  int line_count() const { return static_cast<int>(line_offsets_->size()); }
  // Lines (1-based) that begin inside a multi-line string literal.
  const std::vector<int>& string_lines() const { return *string_lines_; }

 private:
  std::string path_;
  std::shared_ptr<const std::string> text_;
  std::shared_ptr<const std::vector<std::size_t>> line_offsets_;
  std::shared_ptr<const std::vector<int>> string_lines_;
  std::shared_ptr<const py::Module> module_;
};

}  // namespace itest
