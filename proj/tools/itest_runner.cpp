#include <iostream>
#include <string>
#include <vector>

#include "itest/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return itest::run_cli(args, std::cout, std::cerr);
}
