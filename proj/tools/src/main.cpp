#include <iostream>

#include "mcflow/cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mcflow::cli::run(args, std::cout, std::cerr);
}
