#include <iostream>

#include "afgd/cli.hpp"

int main(int argc, char** argv) {
  return afgd::cli::run_cli(argc, argv, std::cout, std::cerr);
}
