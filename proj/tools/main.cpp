#include <iostream>
#include <string>
#include <vector>

#include "sobolev_glue/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return sobolev_glue::dispatch(args, std::cout, std::cerr);
}
