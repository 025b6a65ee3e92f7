#include <iostream>

#include "teamq/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return teamq::run_cli(args, std::cout, std::cerr);
}
