#include <iostream>
#include <string>
#include <vector>

#include "ukd/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return ukd::cli::main_entry(args, std::cout, std::cerr);
}
