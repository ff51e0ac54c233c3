#include <iostream>

#include "bayesnet/cli.hpp"

int main(int argc, char** argv) {
  return bayesnet::run_cli(argc, argv, std::cout, std::cerr);
}
