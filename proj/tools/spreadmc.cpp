#include <iostream>
#include <string>
#include <vector>

#include "spreadmc/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return spreadmc::cli::run_cli(args, std::cout, std::cerr);
}
