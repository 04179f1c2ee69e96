#include <iostream>
#include <string>
#include <vector>

#include "nbet/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return nbet::cli::run(std::move(args), std::cout, std::cerr, nbet::cli::settings_from_environment());
}
