#ifndef KEMMER_SCENARIO_HPP
#define KEMMER_SCENARIO_HPP

// Configuration-driven scenario front end: strict flat-keyed config files,
// scenario runners and artifact writers. The CLI in tools/ is a thin wrapper
// over this module.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kemmer {

enum class ScenarioKind {
  single_relativistic,
  many_relativistic,
  nr_spin0,
  nr_spin1,
  two_slit,
  coupled_1p1,
  verify_suite,
};

const char* scenario_name(ScenarioKind k);

/// Config parse/validation failure; line = 0 when no source line applies.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line_no, std::string key_name, const std::string& message);
  int line;
  std::string key;
};

class ScenarioConfig {
 public:
  /// Strict parse: unknown keys, missing required keys, malformed values and
  /// semantic violations all throw ConfigError with line/key diagnostics.
  /// Defaults for absent optional keys are materialized into the config.
  static ScenarioConfig parse_text(const std::string& text);
  static ScenarioConfig parse_file(const std::string& path);

  ScenarioKind kind() const { return kind_; }

  /// Canonical text form; parse_text(serialize()) yields an equal config.
  std::string serialize() const;

  bool operator==(const ScenarioConfig& o) const { return kind_ == o.kind_ && values_ == o.values_; }

  bool has(const std::string& dotted) const { return values_.count(dotted) > 0; }
  double real(const std::string& dotted) const;
  long integer(const std::string& dotted) const;
  std::uint64_t u64(const std::string& dotted) const;
  bool boolean(const std::string& dotted) const;
  const std::string& str(const std::string& dotted) const;
  std::vector<double> numbers(const std::string& dotted) const;  // any list length

 private:
  ScenarioKind kind_ = ScenarioKind::verify_suite;
  std::map<std::string, std::string> values_;  // "section.key" -> canonical token list

  friend struct ConfigBuilder;
};

/// Catalog of scenario kinds, their keys, defaults and a working example per
/// kind; byte-stable across runs.
std::string scenario_catalog();

/// The example configs embedded in the catalog (kind name -> config text).
std::vector<std::pair<std::string, std::string>> catalog_examples();

struct RunOverrides {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
};

/// Execute a validated config: writes artifacts into the output directory and
/// returns the process exit code (0 = all checks passed, 1 = a runtime check
/// failed; parse errors never reach here).
int run_scenario(const ScenarioConfig& cfg, const RunOverrides& ov, std::ostream& log);

}  // namespace kemmer

#endif  // KEMMER_SCENARIO_HPP
