#include <iostream>
#include <string>
#include <vector>

#include "blockarrival/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return blockarrival::cli::run(args, std::cout, std::cerr);
}
