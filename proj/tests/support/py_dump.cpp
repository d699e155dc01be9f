// Development helper: parses files and prints statement spans or the syntax
// error, in the same format as tests/support/ast_spans.py.
#include <fstream>
#include <iostream>
#include <iterator>

#include "itest/python/parser.hpp"

using namespace itest::py;

static void dump(const Block& block) {
  for (const auto& s : block) {
    std::cout << to_string(s->kind) << ' ' << s->span.begin.line << ' ' << s->span.begin.col << ' '
              << s->span.end.line << ' ' << s->span.end.col << '\n';
    for_each_block(*s, [](const Block& b) { dump(b); });
  }
}

int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    std::ifstream in(argv[i], std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::cout << "== " << argv[i] << '\n';
    try {
      dump(parse_module(text).body);
    } catch (const SyntaxError& e) {
      std::cout << "SyntaxError " << e.what() << '\n';
    }
  }
}
