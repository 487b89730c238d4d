#include <iostream>
#include <string>
#include <vector>

#include "nestprune/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return nestprune::run_cli(args, std::cout, std::cerr);
}
