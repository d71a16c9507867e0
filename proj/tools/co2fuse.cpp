#include <iostream>

#include "co2fuse/cli.hpp"

int main(int argc, char** argv) {
  return co2fuse::cli::run_cli(argc, argv, std::cout, std::cerr);
}
