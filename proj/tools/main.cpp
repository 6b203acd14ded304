#include <iostream>
#include <string>
#include <vector>

#include "gigacrowd/cli/cli.hpp"

int main(int argc, char** argv) {
  gigacrowd::cli::tune_allocator();
  std::vector<std::string> args(argv + 1, argv + argc);
  return gigacrowd::cli::run(args, std::cout, std::cerr);
}
