#include <iostream>
#include <string>
#include <vector>

#include "allelic/cli.h"

int main(int argc, char** argv) {
  auto args = std::vector<std::string>(argv, argv + argc);
  return allelic::run_cli(args, std::cout, std::cerr);
}
