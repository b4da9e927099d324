#include <iostream>
#include <string>
#include <vector>

#include "resistograph/cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return resistograph::cli::run_cli(args, std::cout, std::cerr);
}
