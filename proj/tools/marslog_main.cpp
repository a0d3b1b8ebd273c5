#include <iostream>
#include <string>
#include <vector>

#include "marslog/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return marslog::cli::run(args, std::cout, std::cerr);
}
