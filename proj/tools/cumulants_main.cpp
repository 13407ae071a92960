#include <iostream>

#include "cumulants/cli.hpp"

int main(int argc, char** argv) {
  return cumulants::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
