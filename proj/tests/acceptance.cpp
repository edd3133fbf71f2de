#include <cstdio>
#include <cstdlib>

#include "elastoray/acceptance.hpp"

int main(int argc, char** argv) {
  elastoray::acceptance::Options opt;
  opt.jobs = elastoray::resolve_jobs(argc > 1 ? std::atoi(argv[1]) : 0);
  int failed = 0;
  double total = 0.0;
  for (const auto& [id, fn] : elastoray::acceptance::registry()) {
    const auto v = fn(opt);
    std::printf("%s\n", elastoray::acceptance::format_line(v).c_str());
    std::fflush(stdout);
    failed += !v.pass();
    total += v.seconds;
  }
  const bool in_budget = total < 300.0;
  std::printf("total %.1f s (budget 300 s): %s\n", total, in_budget ? "PASS" : "FAIL");
  std::printf("%d/10 criteria failed\n", failed);
  return failed == 0 && in_budget ? 0 : 1;
}
