#ifndef KEMMER_VERIFY_HPP
#define KEMMER_VERIFY_HPP

// Acceptance criteria and module invariant checks. Every tolerance is pinned
// here, in code; the CLI `verify` subcommand and the acceptance test binary
// both drive this registry.

#include <cstdint>
#include <string>
#include <vector>

namespace kemmer {

enum class Cmp { le, ge };  // pass iff measured <= / >= threshold

struct SubCheck {
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  Cmp cmp = Cmp::le;
  bool pass = false;
};

SubCheck check_le(std::string name, double measured, double threshold);
SubCheck check_ge(std::string name, double measured, double threshold);

struct CriterionResult {
  std::string name;
  std::vector<SubCheck> subs;
  bool pass = false;
  double seconds = 0.0;

  const SubCheck* worst() const;  // sub with the smallest margin
};

struct VerifyOptions {
  bool fast = false;      // reduced sample counts
  int workers = 0;        // 0 = hardware concurrency
  std::uint64_t seed = 20260810;
};

/// The ten acceptance criteria, in order.
std::vector<CriterionResult> run_acceptance_checks(const VerifyOptions& opt);

/// Additional per-module invariant batteries (properties that are not part of
/// the numbered acceptance list).
std::vector<CriterionResult> run_module_checks(const VerifyOptions& opt);

/// Acceptance plus module checks.
std::vector<CriterionResult> run_all_checks(const VerifyOptions& opt);

bool all_pass(const std::vector<CriterionResult>& results);

/// One line per sub-check: "name|measured|threshold|status".
std::string format_report(const std::vector<CriterionResult>& results);

/// One line per criterion: "[PASS] name (worst sub ...)".
std::string format_summary(const std::vector<CriterionResult>& results);

}  // namespace kemmer

#endif  // KEMMER_VERIFY_HPP
