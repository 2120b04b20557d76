#include <iostream>
#include <string>
#include <vector>

#include "pfls/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return pfls::cli::run(args, std::cout, std::cerr);
}
