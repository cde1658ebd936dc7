#include <iostream>

#include "rtsim_cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return rtsim::cli::main(args, std::cout, std::cerr);
}
