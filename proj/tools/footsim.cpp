#include <iostream>
#include <string>
#include <vector>

#include "footsim/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return footsim::run_cli(args, std::cout, std::cerr);
}
