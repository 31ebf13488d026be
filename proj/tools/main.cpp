#include <iostream>
#include <string>
#include <vector>

#include "actmeas/cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return actmeas::cli::run(std::move(args), std::cout, std::cerr);
}
