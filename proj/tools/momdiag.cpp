#include <iostream>

#include "momdiag/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return momdiag::run_cli(args, std::cout, std::cerr);
}
