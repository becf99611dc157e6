#include <iostream>
#include <string>
#include <vector>

#include "emobias/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return emobias::run_cli(args, std::cout, std::cerr);
}
