// One line per acceptance criterion; nonzero exit if any fails.
#include <cstdlib>
#include <iostream>
#include <string>

#include "slabdecay/acceptance.hpp"

int main(int argc, char** argv) {
  slabdecay::AcceptanceOptions opt;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--jobs" && i + 1 < argc) opt.jobs = std::atoi(argv[++i]);
    else if (a == "--only" && i + 1 < argc) opt.only.push_back(std::atoi(argv[++i]));
  }
  const auto results = slabdecay::run_acceptance(opt, [](const slabdecay::CriterionResult& r) {
    std::cout << slabdecay::format_line(r) << std::endl;
  });
  int failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : "all criteria passed") << "\n";
  return failed ? 1 : 0;
}
