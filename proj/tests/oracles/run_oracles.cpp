// Runs every oracle and exits nonzero if any of them fails.

#include <chrono>
#include <cstdio>

#include "oracles.hpp"

int main() {
  const auto start = std::chrono::steady_clock::now();
  bool ok = true;
  for (const auto& r : oracle::run_oracles()) {
    std::printf("%s %-28s cases=%zu max_deviation=%.3e tolerance=%.1e\n", r.pass ? "PASS" : "FAIL",
                r.name.c_str(), r.cases, r.max_deviation, r.tolerance);
    ok = ok && r.pass;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("oracles finished in %.2f s\n", secs);
  return ok ? 0 : 1;
}
