#include <iostream>
#include <string>
#include <vector>

#include "biaseval/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return biaseval::cli::run(args, std::cout, std::cerr);
}
