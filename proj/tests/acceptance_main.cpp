// Acceptance runner: one PASS/FAIL line per criterion; exit status 0 iff all pass.

#include "akscal/acceptance.hpp"

#include <cstdlib>
#include <iostream>

int main(int argc, char** argv) {
  const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 20240601;
  int failed = 0;
  for (const auto& c : akscal::acceptance::criteria()) {
    const auto o = akscal::acceptance::run(c, seed);
    std::cout << akscal::acceptance::summaryLine(o) << std::endl;
    failed += !o.pass;
  }
  const auto total = akscal::acceptance::criteria().size();
  if (failed)
    std::cout << "FAILED: " << failed << " of " << total << " criteria" << std::endl;
  else
    std::cout << "ALL PASSED: " << total << " of " << total << " criteria" << std::endl;
  return failed ? 1 : 0;
}
