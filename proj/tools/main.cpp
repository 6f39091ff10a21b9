#include <iostream>
#include <string>
#include <vector>

#include "bnnpipe/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return bnnpipe::cli::run(args, std::cout, std::cerr);
}
