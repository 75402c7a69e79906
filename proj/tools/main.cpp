#include <iostream>

#include "dthread/cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dthread::cli::run(args, std::cout, std::cerr);
}
