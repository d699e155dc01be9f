#pragma once

#include <string_view>

#include "itest/python/ast.hpp"

namespace itest::py {

// Parses a complete source file. Throws SyntaxError.
Module parse_module(std::string_view source);

// Parses one standalone expression, such as a call argument sliced out of a
// file. Newlines inside the text are insignificant. `origin` is the position
// of the first byte so that node spans refer back to the original file.
ExprPtr parse_expression(std::string_view source, Pos origin = {1, 0});

}  // namespace itest::py
