#include <iostream>

#include "intraday/cli.hpp"

int main(int argc, char **argv) {
  return intraday::cli::run(argc, argv, std::cout, std::cerr);
}
