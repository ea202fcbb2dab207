#include <iostream>

#include "csl/cli.hpp"

int main(int argc, char** argv) {
  return csl::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
