#include <iostream>
#include <string>
#include <vector>

#include "rankforge/cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return rankforge::cli::run(args, std::cout, std::cerr);
}
