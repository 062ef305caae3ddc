#include <algorithm>
#include <cstdlib>
#include <iostream>

#include "sobolev_glue/acceptance.hpp"

int main(int argc, char** argv) {
  sobolev_glue::AcceptanceOptions options;
  for (int i = 1; i < argc; ++i) options.only.push_back(std::atoi(argv[i]));
  const auto results = sobolev_glue::run_acceptance(options, [](const auto& r) {
    std::cout << sobolev_glue::format_criterion_line(r) << std::endl;
  });
  const auto passed = std::count_if(results.begin(), results.end(), [](auto& r) { return r.passed; });
  std::cout << passed << '/' << results.size() << " criteria passed" << std::endl;
  return passed == static_cast<long>(results.size()) ? 0 : 1;
}
