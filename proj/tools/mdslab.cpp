#include <iostream>
#include <string>
#include <vector>

#include "mdslab/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mdslab::run(args, std::cout, std::cerr);
}
