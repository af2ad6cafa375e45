#include <iostream>
#include <string>
#include <vector>

#include "zitpo/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return zitpo::cli::run(args, std::cout, std::cerr);
}
