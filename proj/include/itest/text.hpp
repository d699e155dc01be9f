#pragma once

// Text helpers for generating Python source.

#include <string>
#include <string_view>
#include <vector>

namespace itest::text {

// Moves a statement sliced from a file to a new indentation level. The
// first line is assumed to start at the statement itself; every later line
// loses up to `remove` leading whitespace characters and gains `prefix`.
// Lines listed in `keep` (1-based, relative to `code`) continue a multi-line
// string literal and are copied unchanged.
std::string reindent(std::string_view code, int remove, std::string_view prefix, const std::vector<int>& keep = {});

// A double-quoted Python string literal whose value is `value`.
std::string py_string_literal(std::string_view value);

// Decodes a (possibly implicitly concatenated) Python str literal. Returns
// false for bytes, f-strings, or anything that is not a plain literal.
bool decode_string_literal(std::string_view source, std::string& out);

std::vector<std::string_view> split_lines(std::string_view text);

bool is_valid_utf8(std::string_view text);

}  // namespace itest::text
