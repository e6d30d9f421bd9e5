// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one pass/fail line per criterion. Exit status is the conjunction.

#include <cstring>
#include <iostream>

#include "kemmer/verify.hpp"

int main(int argc, char** argv) {
  kemmer::VerifyOptions opt;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--fast") == 0) opt.fast = true;
    if (std::strcmp(argv[i], "--workers") == 0 && i + 1 < argc) opt.workers = std::atoi(argv[++i]);
  }

  const auto results = kemmer::run_acceptance_checks(opt);
  std::cout << kemmer::format_summary(results);
  std::cout << (kemmer::all_pass(results) ? "ACCEPTANCE: PASS" : "ACCEPTANCE: FAIL") << "\n";
  return kemmer::all_pass(results) ? 0 : 1;
}
