#include "itest/source.hpp"

#include "itest/python/lexer.hpp"
#include "itest/python/parser.hpp"

namespace itest {

SourceFile SourceFile::parse(std::string path, std::string text) {
  SourceFile file;
  file.path_ = std::move(path);
  auto offsets = std::make_shared<std::vector<std::size_t>>();
  offsets->push_back(0);
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\n' && i + 1 < text.size()) offsets->push_back(i + 1);
  }
  file.module_ = std::make_shared<const py::Module>(py::parse_module(text));
  file.string_lines_ = std::make_shared<const std::vector<int>>(py::string_continuation_lines(text));
  file.text_ = std::make_shared<const std::string>(std::move(text));
  file.line_offsets_ = std::move(offsets);
  return file;
}

std::size_t SourceFile::offset(py::Pos pos) const {
  const auto& offsets = *line_offsets_;
  if (pos.line < 1) return 0;
  if (static_cast<std::size_t>(pos.line) > offsets.size()) return text_->size();
  return std::min(offsets[static_cast<std::size_t>(pos.line) - 1] + static_cast<std::size_t>(pos.col), text_->size());
}

std::string_view SourceFile::slice(const py::Span& span) const {
  std::size_t begin = offset(span.begin);
  std::size_t end = offset(span.end);
  return std::string_view(*text_).substr(begin, end > begin ? end - begin : 0);
}

}  // namespace itest
