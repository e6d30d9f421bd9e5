#include "kemmer/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>

#include "kemmer/currents.hpp"
#include "kemmer/fields.hpp"
#include "kemmer/grid.hpp"
#include "kemmer/guidance.hpp"
#include "kemmer/verify.hpp"

namespace kemmer {

namespace {

const char* kKindNames[] = {"single-relativistic", "many-relativistic", "nr-spin0", "nr-spin1",
                            "two-slit",            "coupled-1p1",       "verify"};

std::optional<ScenarioKind> kind_from_name(const std::string& s) {
  for (int i = 0; i < 7; ++i)
    if (s == kKindNames[i]) return static_cast<ScenarioKind>(i);
  return std::nullopt;
}

std::string shortest(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

enum class VType { real, integer, u64, boolean, enumeration, string, list2, list3, list6 };

struct KeySpec {
  std::string key;  // dotted
  VType type = VType::real;
  bool required = true;
  std::string fallback;  // canonical default when optional
  std::string options;   // "a|b|c" for enumeration
  std::string desc;
};

bool parse_doubles(const std::string& raw, std::size_t want, std::vector<double>& out) {
  out.clear();
  std::istringstream is(raw);
  double v;
  while (is >> v) out.push_back(v);
  if (!is.eof()) return false;
  return out.size() == want;
}

// canonicalize a raw token for the given type; empty optional on failure
std::optional<std::string> canonicalize(const KeySpec& spec, const std::string& raw) {
  std::vector<double> nums;
  switch (spec.type) {
    case VType::real:
      if (!parse_doubles(raw, 1, nums) || !std::isfinite(nums[0])) return std::nullopt;
      return shortest(nums[0]);
    case VType::integer: {
      if (!parse_doubles(raw, 1, nums)) return std::nullopt;
      const long l = static_cast<long>(nums[0]);
      if (static_cast<double>(l) != nums[0]) return std::nullopt;
      return std::to_string(l);
    }
    case VType::u64: {
      std::istringstream is(raw);
      std::uint64_t v;
      if (!(is >> v)) return std::nullopt;
      std::string rest;
      if (is >> rest) return std::nullopt;
      return std::to_string(v);
    }
    case VType::boolean:
      if (raw == "true" || raw == "1") return std::string("true");
      if (raw == "false" || raw == "0") return std::string("false");
      return std::nullopt;
    case VType::enumeration: {
      std::istringstream opts(spec.options);
      std::string opt;
      while (std::getline(opts, opt, '|'))
        if (opt == raw) return raw;
      return std::nullopt;
    }
    case VType::string:
      return raw;
    case VType::list2:
    case VType::list3:
    case VType::list6: {
      const std::size_t want = spec.type == VType::list2 ? 2 : (spec.type == VType::list3 ? 3 : 6);
      if (!parse_doubles(raw, want, nums)) return std::nullopt;
      std::string out;
      for (std::size_t i = 0; i < nums.size(); ++i) {
        if (!std::isfinite(nums[i])) return std::nullopt;
        out += (i ? " " : "") + shortest(nums[i]);
      }
      return out;
    }
  }
  return std::nullopt;
}

void add_output_specs(std::vector<KeySpec>& v, bool dir_required) {
  v.push_back({"output.dir", VType::string, dir_required, "", "", "output directory for artifacts"});
  v.push_back({"output.seed", VType::u64, false, "1", "", "master seed; all randomness derives from it"});
  v.push_back({"output.workers", VType::integer, false, "0", "", "worker threads (0 = hardware)"});
}

void add_guidance_specs(std::vector<KeySpec>& v, const char* default_dt) {
  v.push_back({"guidance.dt", VType::real, false, default_dt, "", "integrator step"});
  v.push_back({"guidance.t0", VType::real, false, "0", "", "start time"});
  v.push_back({"guidance.t1", VType::real, true, "", "", "end time"});
  v.push_back({"guidance.trajectories", VType::integer, false, "100", "", "ensemble size (box sampling)"});
  v.push_back({"guidance.start", VType::list3, false, "", "", "explicit start (overrides box sampling)"});
  v.push_back({"guidance.box_lo", VType::list3, false, "", "", "sampling box lower corner"});
  v.push_back({"guidance.box_hi", VType::list3, false, "", "", "sampling box upper corner"});
}

// The mode/term counts needed to expand dynamic keys are read from the raw
// pairs before the schema is assembled.
long peek_count(const std::map<std::string, std::pair<std::string, int>>& raw, const std::string& key, long fallback) {
  auto it = raw.find(key);
  if (it == raw.end()) return fallback;
  std::vector<double> nums;
  if (!parse_doubles(it->second.first, 1, nums)) return fallback;
  return static_cast<long>(nums[0]);
}

std::string peek_string(const std::map<std::string, std::pair<std::string, int>>& raw, const std::string& key) {
  auto it = raw.find(key);
  return it == raw.end() ? std::string() : it->second.first;
}

std::vector<KeySpec> schema_for(ScenarioKind kind, const std::map<std::string, std::pair<std::string, int>>& raw) {
  std::vector<KeySpec> v;
  v.push_back({"scenario", VType::enumeration, true, "",
               "single-relativistic|many-relativistic|nr-spin0|nr-spin1|two-slit|coupled-1p1|verify", "scenario kind"});
  switch (kind) {
    case ScenarioKind::single_relativistic: {
      v.push_back({"field.spin", VType::enumeration, true, "", "spin0|spin1", "DKP representation"});
      v.push_back({"field.m", VType::real, true, "", "", "mass (natural units)"});
      v.push_back({"field.modes", VType::integer, true, "", "", "number of plane-wave modes (1..8)"});
      const long n = std::clamp(peek_count(raw, "field.modes", 1), 1L, 8L);
      const bool spin1 = peek_string(raw, "field.spin") == "spin1";
      for (long k = 1; k <= n; ++k) {
        const std::string p = "field.mode" + std::to_string(k);
        v.push_back({p + "_amp", VType::list2, true, "", "", "complex amplitude (re im)"});
        v.push_back({p + "_k", VType::list3, true, "", "", "spatial momentum; energy from the mass shell"});
        if (spin1) v.push_back({p + "_eps", VType::list6, true, "", "", "spatial polarization (re im x3); eps0 solved"});
      }
      v.push_back({"observer.beta", VType::list3, false, "0 0 0", "", "observer boost velocity"});
      add_guidance_specs(v, "0.005");
      add_output_specs(v, true);
      break;
    }
    case ScenarioKind::many_relativistic: {
      v.push_back({"field.spin", VType::enumeration, true, "", "spin0|spin1", "DKP representation per particle"});
      v.push_back({"field.m", VType::real, true, "", "", "mass (natural units)"});
      v.push_back({"field.terms", VType::integer, true, "", "", "number of product terms (1..4)"});
      const long n = std::clamp(peek_count(raw, "field.terms", 1), 1L, 4L);
      const bool spin1 = peek_string(raw, "field.spin") == "spin1";
      for (long k = 1; k <= n; ++k) {
        const std::string p = "field.term" + std::to_string(k);
        v.push_back({p + "_coeff", VType::list2, true, "", "", "complex coefficient (re im)"});
        v.push_back({p + "_k1", VType::list3, true, "", "", "particle-1 mode momentum"});
        v.push_back({p + "_k2", VType::list3, true, "", "", "particle-2 mode momentum"});
        if (spin1) {
          v.push_back({p + "_eps1", VType::list6, true, "", "", "particle-1 polarization"});
          v.push_back({p + "_eps2", VType::list6, true, "", "", "particle-2 polarization"});
        }
      }
      v.push_back({"guidance.dt", VType::real, false, "0.005", "", "integrator step"});
      v.push_back({"guidance.t0", VType::real, false, "0", "", "start time"});
      v.push_back({"guidance.t1", VType::real, true, "", "", "end time"});
      v.push_back({"guidance.start1", VType::list3, true, "", "", "particle-1 start"});
      v.push_back({"guidance.start2", VType::list3, true, "", "", "particle-2 start"});
      add_output_specs(v, true);
      break;
    }
    case ScenarioKind::nr_spin0:
    case ScenarioKind::nr_spin1: {
      v.push_back({"field.m", VType::real, true, "", "", "mass"});
      v.push_back({"field.sigma", VType::real, true, "", "", "packet width"});
      v.push_back({"field.center", VType::list3, false, "0 0 0", "", "packet center at t0"});
      v.push_back({"field.k", VType::list3, false, "0 0 0", "", "mean momentum"});
      if (kind == ScenarioKind::nr_spin1)
        v.push_back({"field.eps", VType::list6, true, "", "", "polarization (re im x3), unit norm"});
      add_guidance_specs(v, "0.01");
      add_output_specs(v, true);
      break;
    }
    case ScenarioKind::two_slit: {
      v.push_back({"field.spin", VType::enumeration, true, "", "spin0|spin1", "guidance law"});
      v.push_back({"field.m", VType::real, true, "", "", "mass"});
      v.push_back({"field.sigma", VType::real, true, "", "", "slit (packet) width"});
      v.push_back({"field.separation", VType::real, true, "", "", "slit separation along y"});
      v.push_back({"field.speed", VType::real, true, "", "", "forward speed along x"});
      if (peek_string(raw, "field.spin") == "spin1")
        v.push_back({"field.eps", VType::list6, true, "", "", "polarization (re im x3), unit norm"});
      add_guidance_specs(v, "0.004");
      add_output_specs(v, true);
      break;
    }
    case ScenarioKind::coupled_1p1: {
      v.push_back({"grid.x0", VType::real, true, "", "", "left edge"});
      v.push_back({"grid.x1", VType::real, true, "", "", "right edge"});
      v.push_back({"grid.nx", VType::integer, true, "", "", "spatial nodes"});
      v.push_back({"grid.t0", VType::real, false, "0", "", "start time"});
      v.push_back({"grid.t1", VType::real, true, "", "", "end time"});
      v.push_back({"grid.nt", VType::integer, true, "", "", "time levels"});
      v.push_back({"grid.boundary", VType::enumeration, false, "dirichlet0", "periodic|dirichlet0", "boundary"});
      v.push_back({"field.m", VType::real, true, "", "", "mass"});
      v.push_back({"field.e", VType::real, true, "", "", "coupling constant"});
      v.push_back({"field.potential", VType::enumeration, true, "", "free|constant-v0|linear-efield", "external V^mu"});
      v.push_back({"field.v0", VType::real, false, "0", "", "V^0 value (constant-v0)"});
      v.push_back({"field.efield", VType::real, false, "0", "", "field strength (linear-efield)"});
      v.push_back({"field.packet_sigma", VType::real, true, "", "", "initial packet width"});
      v.push_back({"field.packet_k", VType::real, true, "", "", "initial packet momentum"});
      v.push_back({"field.packet_center", VType::real, true, "", "", "initial packet center"});
      v.push_back({"output.stride_t", VType::integer, false, "4", "", "grid export stride in t"});
      v.push_back({"output.stride_x", VType::integer, false, "2", "", "grid export stride in x"});
      add_output_specs(v, true);
      break;
    }
    case ScenarioKind::verify_suite: {
      v.push_back({"verify.fast", VType::boolean, false, "false", "", "reduced sample counts"});
      v.push_back({"verify.scope", VType::enumeration, false, "all", "acceptance|modules|all", "check scope"});
      add_output_specs(v, false);
      break;
    }
  }
  return v;
}

std::array<Complex, 3> eps_from_list6(const std::vector<double>& l) {
  return {Complex{l[0], l[1]}, Complex{l[2], l[3]}, Complex{l[4], l[5]}};
}

}  // namespace

const char* scenario_name(ScenarioKind k) { return kKindNames[static_cast<int>(k)]; }

ConfigError::ConfigError(int line_no, std::string key_name, const std::string& message)
    : std::runtime_error("config error (line " + std::to_string(line_no) + ", key '" + key_name + "'): " + message),
      line(line_no),
      key(std::move(key_name)) {}

struct ConfigBuilder {
  static ScenarioConfig build(ScenarioKind kind, std::map<std::string, std::string> values) {
    ScenarioConfig c;
    c.kind_ = kind;
    c.values_ = std::move(values);
    return c;
  }
};

ScenarioConfig ScenarioConfig::parse_text(const std::string& text) {
  // Pass 1: raw "section.key" -> (value, line).
  std::map<std::string, std::pair<std::string, int>> raw;
  std::istringstream is(text);
  std::string line;
  std::string section;
  int line_no = 0;
  auto trim = [](std::string s) {
    const char* ws = " \t\r";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
  };
  while (std::getline(is, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line_no, line, "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(line_no, line, "empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(line_no, line, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(line_no, line, "empty key");
    if (value.empty()) throw ConfigError(line_no, key, "empty value");
    const std::string dotted = section.empty() ? key : section + "." + key;
    if (raw.count(dotted)) throw ConfigError(line_no, dotted, "duplicate key");
    raw[dotted] = {value, line_no};
  }

  const auto scen_it = raw.find("scenario");
  if (scen_it == raw.end()) throw ConfigError(0, "scenario", "missing scenario kind");
  const auto kind = kind_from_name(scen_it->second.first);
  if (!kind) throw ConfigError(scen_it->second.second, "scenario", "unknown scenario kind '" + scen_it->second.first + "'");

  const std::vector<KeySpec> schema = schema_for(*kind, raw);

  // Unknown keys.
  for (const auto& [dotted, value_line] : raw) {
    const bool known = std::any_of(schema.begin(), schema.end(), [&](const KeySpec& s) { return s.key == dotted; });
    if (!known) throw ConfigError(value_line.second, dotted, "unknown key for scenario '" + std::string(scenario_name(*kind)) + "'");
  }

  // Required, defaults, canonical form.
  std::map<std::string, std::string> values;
  for (const auto& spec : schema) {
    const auto it = raw.find(spec.key);
    if (it == raw.end()) {
      if (spec.required) throw ConfigError(0, spec.key, "required key missing");
      if (!spec.fallback.empty()) values[spec.key] = spec.fallback;
      continue;
    }
    const auto canon = canonicalize(spec, it->second.first);
    if (!canon) throw ConfigError(it->second.second, spec.key, "malformed value '" + it->second.first + "'");
    values[spec.key] = *canon;
  }

  ScenarioConfig cfg = ConfigBuilder::build(*kind, std::move(values));

  // Semantic checks.
  auto require_positive = [&](const char* key) {
    if (cfg.has(key) && !(cfg.real(key) > 0.0)) throw ConfigError(0, key, "must be positive");
  };
  require_positive("field.m");
  require_positive("field.sigma");
  require_positive("field.separation");
  require_positive("field.packet_sigma");
  require_positive("guidance.dt");
  if (cfg.has("guidance.t1") && !(cfg.real("guidance.t1") >= cfg.real("guidance.t0")))
    throw ConfigError(0, "guidance.t1", "must be >= guidance.t0");
  if (cfg.has("guidance.start") && cfg.has("guidance.box_lo"))
    throw ConfigError(0, "guidance.start", "give either an explicit start or a sampling box, not both");
  if (cfg.has("guidance.box_lo") != cfg.has("guidance.box_hi"))
    throw ConfigError(0, "guidance.box_lo", "box_lo and box_hi must be given together");
  if (cfg.has("field.eps")) {
    const auto e = eps_from_list6(cfg.numbers("field.eps"));
    const double n2 = std::norm(e[0]) + std::norm(e[1]) + std::norm(e[2]);
    if (std::abs(n2 - 1.0) > 1e-10) throw ConfigError(0, "field.eps", "polarization must have unit norm");
  }
  if (cfg.kind() == ScenarioKind::coupled_1p1) {
    if (cfg.integer("grid.nx") < 5 || cfg.integer("grid.nt") < 3) throw ConfigError(0, "grid.nx", "lattice too small");
    if (!(cfg.real("grid.x1") > cfg.real("grid.x0"))) throw ConfigError(0, "grid.x1", "must exceed grid.x0");
    if (!(cfg.real("grid.t1") > cfg.real("grid.t0"))) throw ConfigError(0, "grid.t1", "must exceed grid.t0");
    const std::string pot = cfg.str("field.potential");
    if (pot == "constant-v0" && !cfg.has("field.v0")) throw ConfigError(0, "field.v0", "required for constant-v0");
    if (pot == "linear-efield" && !cfg.has("field.efield"))
      throw ConfigError(0, "field.efield", "required for linear-efield");
  }
  return cfg;
}

ScenarioConfig ScenarioConfig::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(0, path, "cannot open config file");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_text(ss.str());
}

std::string ScenarioConfig::serialize() const {
  std::ostringstream os;
  os << "scenario = " << scenario_name(kind_) << "\n";
  std::string section;
  for (const auto& [dotted, value] : values_) {
    if (dotted == "scenario") continue;
    const auto dot = dotted.find('.');
    const std::string sec = dotted.substr(0, dot);
    const std::string key = dotted.substr(dot + 1);
    if (sec != section) {
      section = sec;
      os << "[" << section << "]\n";
    }
    os << key << " = " << value << "\n";
  }
  return os.str();
}

double ScenarioConfig::real(const std::string& dotted) const { return numbers(dotted).at(0); }

long ScenarioConfig::integer(const std::string& dotted) const { return static_cast<long>(numbers(dotted).at(0)); }

std::uint64_t ScenarioConfig::u64(const std::string& dotted) const {
  std::istringstream is(str(dotted));
  std::uint64_t v;
  is >> v;
  return v;
}

bool ScenarioConfig::boolean(const std::string& dotted) const { return str(dotted) == "true"; }

const std::string& ScenarioConfig::str(const std::string& dotted) const {
  const auto it = values_.find(dotted);
  if (it == values_.end()) throw std::out_of_range("config key not present: " + dotted);
  return it->second;
}

std::vector<double> ScenarioConfig::numbers(const std::string& dotted) const {
  std::vector<double> out;
  std::istringstream is(str(dotted));
  double v;
  while (is >> v) out.push_back(v);
  return out;
}

// ---------------------------------------------------------------------------
// catalog

namespace {

const std::vector<std::pair<std::string, std::string>>& examples() {
  static const std::vector<std::pair<std::string, std::string>> ex = {
      {"single-relativistic",
       "scenario = single-relativistic\n[field]\nspin = spin0\nm = 1.0\nmodes = 2\nmode1_amp = 1 0\nmode1_k = 0.3 0 0\n"
       "mode2_amp = 0.5 0.2\nmode2_k = -0.2 0.1 0\n[observer]\nbeta = 0 0 0\n[guidance]\ndt = 0.005\nt1 = 2.0\n"
       "start = 0.1 0 0\n[output]\ndir = out/single\nseed = 7\n"},
      {"many-relativistic",
       "scenario = many-relativistic\n[field]\nspin = spin0\nm = 1.0\nterms = 2\nterm1_coeff = 1 0\n"
       "term1_k1 = 0.3 0 0\nterm1_k2 = -0.1 0.2 0\nterm2_coeff = 0.6 0.4\nterm2_k1 = -0.2 0.1 0\nterm2_k2 = 0.15 0 0.1\n"
       "[guidance]\ndt = 0.005\nt1 = 1.5\nstart1 = 0.2 0 0\nstart2 = -0.3 0.1 0\n[output]\ndir = out/many\n"},
      {"nr-spin0",
       "scenario = nr-spin0\n[field]\nm = 1.0\nsigma = 1.0\ncenter = 0 0 0\nk = 0.5 0 0\n[guidance]\ndt = 0.01\n"
       "t1 = 2.0\ntrajectories = 200\nbox_lo = -4 0 0\nbox_hi = 4 0 0\n[output]\ndir = out/nr0\nseed = 11\n"},
      {"nr-spin1",
       "scenario = nr-spin1\n[field]\nm = 1.0\nsigma = 1.0\ncenter = 0 0 0\nk = 0 0 0\n"
       "eps = 0.70710678118654752 0 0 0.70710678118654752 0 0\n[guidance]\ndt = 0.01\nt1 = 1.0\ntrajectories = 100\n"
       "box_lo = -3 -3 0\nbox_hi = 3 3 0\n[output]\ndir = out/nr1\n"},
      {"two-slit",
       "scenario = two-slit\n[field]\nspin = spin0\nm = 1.0\nsigma = 0.35\nseparation = 2.0\nspeed = 0.8\n[guidance]\n"
       "dt = 0.004\nt1 = 3.0\ntrajectories = 100\n[output]\ndir = out/twoslit\nseed = 5\n"},
      {"coupled-1p1",
       "scenario = coupled-1p1\n[grid]\nx0 = -16\nx1 = 16\nnx = 641\nt1 = 2.0\nnt = 161\n[field]\nm = 1.0\ne = 0.5\n"
       "potential = linear-efield\nefield = 0.4\npacket_sigma = 1.0\npacket_k = 0.5\npacket_center = -4\n[output]\n"
       "dir = out/coupled\n"},
      {"verify", "scenario = verify\n[verify]\nfast = true\nscope = modules\n[output]\nseed = 3\n"},
  };
  return ex;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> catalog_examples() { return examples(); }

std::string scenario_catalog() {
  std::ostringstream os;
  os << "scenario kinds (7):\n\n";
  for (const auto& [name, example] : examples()) {
    const auto kind = kind_from_name(name);
    os << "== " << name << "\n";
    // Parse the example to recover the full key set with defaults applied.
    const ScenarioConfig cfg = ScenarioConfig::parse_text(example);
    (void)kind;
    std::map<std::string, std::pair<std::string, int>> raw;
    const std::vector<KeySpec> schema = schema_for(cfg.kind(), raw);
    for (const auto& s : schema) {
      if (s.key == "scenario") continue;
      os << "  " << s.key;
      for (std::size_t pad = s.key.size(); pad < 24; ++pad) os << ' ';
      os << (s.required ? "required" : ("default=" + (s.fallback.empty() ? std::string("(derived)") : s.fallback)));
      os << "  -- " << s.desc;
      if (!s.options.empty() && s.key != "output.dir") os << " {" << s.options << "}";
      os << "\n";
    }
    os << "  example:\n";
    std::istringstream ex(example);
    std::string line;
    while (std::getline(ex, line)) os << "    " << line << "\n";
    os << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// runners

namespace {

namespace fs = std::filesystem;

struct ReportWriter {
  std::vector<SubCheck> checks;

  void add(SubCheck s) { checks.push_back(std::move(s)); }

  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const SubCheck& s) { return s.pass; });
  }

  void write(const fs::path& path, const std::string& echo, double seconds) const {
    std::ofstream os(path);
    os.precision(12);
    os << "# scenario report\n" << echo;
    for (const auto& s : checks)
      os << s.name << "|" << s.measured << "|" << (s.cmp == Cmp::le ? "<=" : ">=") << s.threshold << "|"
         << (s.pass ? "PASS" : "FAIL") << "\n";
    os << "overall|" << (all_pass() ? "PASS" : "FAIL") << "\n";
    os << "duration_seconds|" << seconds << "\n";
  }
};

void write_trajectories_csv(const fs::path& path, const std::vector<Trajectory>& trajs) {
  std::ofstream os(path);
  os.precision(12);
  os << "t,particle,x,y,z,vx,vy,vz,density,speed\n";
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    for (const auto& s : trajs[i].samples) {
      for (std::size_t p = 0; p < s.pos.size(); ++p) {
        os << s.t << "," << p << "," << s.pos[p].x << "," << s.pos[p].y << "," << s.pos[p].z << "," << s.vel[p].x << ","
           << s.vel[p].y << "," << s.vel[p].z << "," << s.density << "," << s.speed[p] << "\n";
      }
    }
    os << "\n";  // gnuplot block separator between trajectories
  }
}

const char* termination_name(Termination t) {
  switch (t) {
    case Termination::completed:
      return "completed";
    case Termination::node_abort:
      return "node-abort";
    case Termination::domain_exit:
      return "domain-exit";
  }
  return "unknown";
}

void write_summary(const fs::path& path, const std::vector<Trajectory>& trajs) {
  std::ofstream os(path);
  long completed = 0, node = 0, domain = 0;
  for (const auto& t : trajs) {
    if (t.status == Termination::completed) ++completed;
    if (t.status == Termination::node_abort) ++node;
    if (t.status == Termination::domain_exit) ++domain;
  }
  os << "trajectories " << trajs.size() << "\ncompleted " << completed << "\nnode-abort " << node << "\ndomain-exit "
     << domain << "\n";
  for (std::size_t i = 0; i < trajs.size(); ++i) os << i << " " << termination_name(trajs[i].status) << "\n";
}

void write_trajectory_plot(const fs::path& path, const std::string& csv_name) {
  std::ofstream os(path);
  os << "# gnuplot script: trajectory y vs x per particle\n"
     << "set datafile separator ','\n"
     << "set xlabel 'x'\nset ylabel 'y'\nset key off\n"
     << "plot '" << csv_name << "' using 3:4 with lines lc rgb '#336699'\n";
}

void write_grid_plot(const fs::path& path, const std::string& dat_name) {
  std::ofstream os(path);
  os << "# gnuplot script: |phi| over (x, t)\n"
     << "set xlabel 'x'\nset ylabel 't'\n"
     << "plot '" << dat_name << "' using 2:1:(sqrt($3*$3+$4*$4)) with image\n";
}

struct ScenarioContext {
  fs::path out;
  std::uint64_t seed = 1;
  int workers = 0;
};

ScenarioContext make_context(const ScenarioConfig& cfg, const RunOverrides& ov, bool needs_dir) {
  ScenarioContext ctx;
  ctx.seed = ov.seed ? *ov.seed : cfg.u64("output.seed");
  ctx.workers = ov.workers ? *ov.workers : static_cast<int>(cfg.integer("output.workers"));
  std::string dir;
  if (ov.out_dir)
    dir = *ov.out_dir;
  else if (cfg.has("output.dir"))
    dir = cfg.str("output.dir");
  if (needs_dir && dir.empty()) throw ConfigError(0, "output.dir", "required");
  ctx.out = dir;
  return ctx;
}

std::vector<Vec3> resolve_starts(const ScenarioConfig& cfg, const DensityFn& rho, std::uint64_t seed, Box fallback_box) {
  if (cfg.has("guidance.start")) {
    const auto s = cfg.numbers("guidance.start");
    return {Vec3{s[0], s[1], s[2]}};
  }
  Box box = fallback_box;
  if (cfg.has("guidance.box_lo")) {
    const auto lo = cfg.numbers("guidance.box_lo");
    const auto hi = cfg.numbers("guidance.box_hi");
    box = Box{Vec3{lo[0], lo[1], lo[2]}, Vec3{hi[0], hi[1], hi[2]}};
  }
  const long n = cfg.integer("guidance.trajectories");
  if (n < 1) throw ConfigError(0, "guidance.trajectories", "must be >= 1");
  return sample_ensemble(rho, box, static_cast<int>(n), seed).positions;
}

double density_sup(const DensityFn& rho, const std::vector<Vec3>& pts) {
  double sup = 0.0;
  for (const auto& p : pts) sup = std::max(sup, rho(p));
  return sup;
}

int run_single_relativistic(const ScenarioConfig& cfg, const ScenarioContext& ctx, std::ostream& log) {
  const auto t_start = std::chrono::steady_clock::now();
  const double mass = cfg.real("field.m");
  const bool spin1 = cfg.str("field.spin") == "spin1";
  const long nmodes = cfg.integer("field.modes");

  KemmerField field = [&] {
    if (!spin1) {
      std::vector<KgMode> modes;
      for (long k = 1; k <= nmodes; ++k) {
        const auto amp = cfg.numbers("field.mode" + std::to_string(k) + "_amp");
        const auto kk = cfg.numbers("field.mode" + std::to_string(k) + "_k");
        modes.push_back(kg_mode(Complex{amp[0], amp[1]}, Vec3{kk[0], kk[1], kk[2]}, mass));
      }
      return embed_spin0(ScalarField::superposition(std::move(modes), mass));
    }
    std::vector<ProcaMode> modes;
    for (long k = 1; k <= nmodes; ++k) {
      const auto amp = cfg.numbers("field.mode" + std::to_string(k) + "_amp");
      const auto kk = cfg.numbers("field.mode" + std::to_string(k) + "_k");
      const auto ep = eps_from_list6(cfg.numbers("field.mode" + std::to_string(k) + "_eps"));
      modes.push_back(proca_mode(Complex{amp[0], amp[1]}, Vec3{kk[0], kk[1], kk[2]}, mass, ep));
    }
    return embed_spin1(ProcaField::superposition(std::move(modes), mass));
  }();

  const auto beta = cfg.numbers("observer.beta");
  const Observer obs = (beta[0] == 0 && beta[1] == 0 && beta[2] == 0) ? rest_observer()
                                                                      : boosted_observer(Vec3{beta[0], beta[1], beta[2]});
  const DkpRep& rep = representation(field.kind());
  const double t0 = cfg.real("guidance.t0"), t1 = cfg.real("guidance.t1");

  const DensityFn rho = [&](const Vec3& x) {
    return observer_current(energy_momentum(rep, field.psi(Event{t0, x})), obs)[0];
  };
  const std::vector<Vec3> starts = resolve_starts(cfg, rho, derive_seed(ctx.seed, 1), Box{Vec3{-2, -2, -2}, Vec3{2, 2, 2}});

  GuidanceConfig gcfg;
  gcfg.source = CurrentSource::kemmer_energy_momentum;
  gcfg.observer = obs;
  gcfg.dt = cfg.real("guidance.dt");
  gcfg.node_eps = 1e-12 * std::max(density_sup(rho, starts), 1e-30);

  const FlowFn flow = make_flow(field, gcfg);
  std::vector<std::vector<Vec3>> xs;
  for (const auto& p : starts) xs.push_back({p});
  const std::vector<Trajectory> trajs = integrate_ensemble(flow, 1, xs, t0, t1, gcfg, ctx.workers);

  ReportWriter rw;
  double max_speed = 0.0;
  for (const auto& tr : trajs) max_speed = std::max(max_speed, causality_audit(tr, gcfg.source).max_speed);
  rw.add(check_le("causality-max-speed", max_speed, 1.0 + 1e-9));

  CurrentFn current = [&](const Event& e) { return observer_current(energy_momentum(rep, field.psi(e)), obs); };
  const DivergenceReport dr = divergence_audit(current, Event{0.5 * (t0 + t1), starts[0]}, 0.05);
  rw.add(check_ge("conservation-ratio", dr.ratio.value_or(0.0), 3.5));

  write_trajectories_csv(ctx.out / "trajectories.csv", trajs);
  write_summary(ctx.out / "summary.txt", trajs);
  write_trajectory_plot(ctx.out / "plot.gp", "trajectories.csv");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  rw.write(ctx.out / "report.txt", cfg.serialize(), secs);
  log << (rw.all_pass() ? "PASS" : "FAIL") << " single-relativistic: " << trajs.size() << " trajectories\n";
  return rw.all_pass() ? 0 : 1;
}

int run_many_relativistic(const ScenarioConfig& cfg, const ScenarioContext& ctx, std::ostream& log) {
  const auto t_start = std::chrono::steady_clock::now();
  const double mass = cfg.real("field.m");
  const bool spin1 = cfg.str("field.spin") == "spin1";
  const long nterms = cfg.integer("field.terms");

  auto factor = [&](const std::string& kkey, const std::string& ekey) {
    const auto kk = cfg.numbers(kkey);
    if (!spin1)
      return embed_spin0(ScalarField::superposition({kg_mode({1.0, 0.0}, Vec3{kk[0], kk[1], kk[2]}, mass)}, mass));
    const auto ep = eps_from_list6(cfg.numbers(ekey));
    return embed_spin1(ProcaField::superposition({proca_mode({1.0, 0.0}, Vec3{kk[0], kk[1], kk[2]}, mass, ep)}, mass));
  };

  std::vector<ProductTerm> terms;
  for (long k = 1; k <= nterms; ++k) {
    const std::string p = "field.term" + std::to_string(k);
    const auto co = cfg.numbers(p + "_coeff");
    terms.push_back(ProductTerm{Complex{co[0], co[1]}, {factor(p + "_k1", p + "_eps1"), factor(p + "_k2", p + "_eps2")}});
  }
  const KemmerFieldN field = KemmerFieldN::product_sum(std::move(terms));

  const auto s1 = cfg.numbers("guidance.start1");
  const auto s2 = cfg.numbers("guidance.start2");
  const std::vector<Vec3> start{Vec3{s1[0], s1[1], s1[2]}, Vec3{s2[0], s2[1], s2[2]}};
  const double t0 = cfg.real("guidance.t0"), t1 = cfg.real("guidance.t1");

  auto ctx_mc = std::make_shared<MultiContext>(field.kinds(), rest_observer());
  GuidanceConfig gcfg;
  gcfg.dt = cfg.real("guidance.dt");
  gcfg.node_eps = 1e-12 * std::max(ctx_mc->evaluate(field.psi(t0, start)).density, 1e-30);
  const Trajectory traj = integrate_many(field, gcfg, start, t0, t1);

  ReportWriter rw;
  double min_density = 1e300;
  for (const auto& s : traj.samples) min_density = std::min(min_density, s.density);
  rw.add(check_ge("min-sampled-density", min_density, -1e-10));

  MultiFn current = [&](double tt, const std::vector<Vec3>& pos) { return ctx_mc->evaluate(field.psi(tt, pos)); };
  const DivergenceReport dr = divergence_audit_multi(current, 0.5 * (t0 + t1), start, 0.05);
  rw.add(check_ge("multi-conservation-ratio", dr.ratio.value_or(0.0), 3.5));

  write_trajectories_csv(ctx.out / "trajectories.csv", {traj});
  write_summary(ctx.out / "summary.txt", {traj});
  write_trajectory_plot(ctx.out / "plot.gp", "trajectories.csv");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  rw.write(ctx.out / "report.txt", cfg.serialize(), secs);
  log << (rw.all_pass() ? "PASS" : "FAIL") << " many-relativistic\n";
  return rw.all_pass() ? 0 : 1;
}

int run_nr(const ScenarioConfig& cfg, const ScenarioContext& ctx, std::ostream& log) {
  const auto t_start = std::chrono::steady_clock::now();
  const bool spin1 = cfg.kind() == ScenarioKind::nr_spin1;
  const double mass = cfg.real("field.m");
  const double sigma = cfg.real("field.sigma");
  const auto c = cfg.numbers("field.center");
  const auto k = cfg.numbers("field.k");
  std::optional<std::array<Complex, 3>> eps;
  if (spin1) eps = eps_from_list6(cfg.numbers("field.eps"));
  const NrField field = NrField::gaussian(spin1 ? Spin::spin1 : Spin::spin0, mass, sigma, Vec3{c[0], c[1], c[2]},
                                          Vec3{k[0], k[1], k[2]}, eps);

  const double t0 = cfg.real("guidance.t0"), t1 = cfg.real("guidance.t1");
  const DensityFn rho = [&](const Vec3& x) { return std::norm(field.scalar_sample(Event{t0, x}).value); };
  const Box fallback{Vec3{c[0] - 5 * sigma, c[1] - 5 * sigma, 0.0}, Vec3{c[0] + 5 * sigma, c[1] + 5 * sigma, 0.0}};
  const std::vector<Vec3> starts = resolve_starts(cfg, rho, derive_seed(ctx.seed, 1), fallback);

  GuidanceConfig gcfg;
  gcfg.source = spin1 ? CurrentSource::nr_spin1 : CurrentSource::nr_spin0;
  gcfg.dt = cfg.real("guidance.dt");
  gcfg.node_eps = 1e-12 * std::max(density_sup(rho, starts), 1e-30);
  const FlowFn flow = make_flow(field, gcfg);
  std::vector<std::vector<Vec3>> xs;
  for (const auto& p : starts) xs.push_back({p});
  const std::vector<Trajectory> trajs = integrate_ensemble(flow, 1, xs, t0, t1, gcfg, ctx.workers);

  ReportWriter rw;
  std::mt19937_64 rng(derive_seed(ctx.seed, 2));
  std::uniform_real_distribution<double> ur(-2.0, 2.0);
  double res = 0.0;
  for (int i = 0; i < 20; ++i)
    res = std::max(res, field.schrodinger_residual(Event{t0 + (t1 - t0) * 0.05 * i, Vec3{c[0] + ur(rng), c[1] + ur(rng), c[2] + ur(rng)}}));
  rw.add(check_le("schrodinger-residual", res, 1e-8));
  long finite_violations = 0;
  for (const auto& tr : trajs)
    for (const auto& s : tr.samples)
      if (!std::isfinite(s.pos[0].x) || !std::isfinite(s.pos[0].y) || !std::isfinite(s.pos[0].z)) ++finite_violations;
  rw.add(check_le("non-finite-samples", static_cast<double>(finite_violations), 0.0));

  write_trajectories_csv(ctx.out / "trajectories.csv", trajs);
  write_summary(ctx.out / "summary.txt", trajs);
  write_trajectory_plot(ctx.out / "plot.gp", "trajectories.csv");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  rw.write(ctx.out / "report.txt", cfg.serialize(), secs);
  log << (rw.all_pass() ? "PASS" : "FAIL") << " " << scenario_name(cfg.kind()) << ": " << trajs.size()
      << " trajectories\n";
  return rw.all_pass() ? 0 : 1;
}

int run_two_slit(const ScenarioConfig& cfg, const ScenarioContext& ctx, std::ostream& log) {
  const auto t_start = std::chrono::steady_clock::now();
  const bool spin1 = cfg.str("field.spin") == "spin1";
  const double mass = cfg.real("field.m");
  const double sigma = cfg.real("field.sigma");
  const double sep = cfg.real("field.separation");
  const double speed = cfg.real("field.speed");
  std::optional<std::array<Complex, 3>> eps;
  if (spin1) eps = eps_from_list6(cfg.numbers("field.eps"));

  const NrField f0 = NrField::two_slit(Spin::spin0, mass, sep, sigma, speed);
  const NrField field = spin1 ? NrField::two_slit(Spin::spin1, mass, sep, sigma, speed, eps) : f0;

  const double t0 = cfg.real("guidance.t0"), t1 = cfg.real("guidance.t1");
  const DensityFn rho = [&](const Vec3& x) { return std::norm(f0.scalar_sample(Event{t0, x}).value); };
  const Box fallback{Vec3{-2.0 * sigma, -(0.5 * sep + 3.0 * sigma), 0.0}, Vec3{2.0 * sigma, 0.5 * sep + 3.0 * sigma, 0.0}};
  const std::vector<Vec3> starts = resolve_starts(cfg, rho, derive_seed(ctx.seed, 1), fallback);

  GuidanceConfig gcfg;
  gcfg.source = spin1 ? CurrentSource::nr_spin1 : CurrentSource::nr_spin0;
  gcfg.dt = cfg.real("guidance.dt");
  gcfg.node_eps = 1e-12 * std::max(density_sup(rho, starts), 1e-30);
  const FlowFn flow = make_flow(field, gcfg);
  std::vector<std::vector<Vec3>> xs;
  for (const auto& p : starts) xs.push_back({p});
  const std::vector<Trajectory> trajs = integrate_ensemble(flow, 1, xs, t0, t1, gcfg, ctx.workers);

  ReportWriter rw;
  if (!spin1) {
    long crossings = 0;
    for (const auto& tr : trajs)
      for (std::size_t s = 1; s < tr.samples.size(); ++s)
        if ((tr.samples[s].pos[0].y > 0.0) != (tr.samples[s - 1].pos[0].y > 0.0)) ++crossings;
    rw.add(check_le("axis-crossings", static_cast<double>(crossings), 0.0));
  } else {
    GuidanceConfig g0 = gcfg;
    g0.source = CurrentSource::nr_spin0;
    const FlowFn flow0 = make_flow(f0, g0);
    const std::vector<Trajectory> base = integrate_ensemble(flow0, 1, xs, t0, t1, g0, ctx.workers);
    double min_dev = 1e300;
    for (std::size_t i = 0; i < trajs.size(); ++i) {
      double dev = 0.0;
      const std::size_t n = std::min(trajs[i].samples.size(), base[i].samples.size());
      for (std::size_t s = 0; s < n; ++s) dev = std::max(dev, (trajs[i].samples[s].pos[0] - base[i].samples[s].pos[0]).norm());
      min_dev = std::min(min_dev, dev);
    }
    rw.add(check_ge("spin-term-deviation", min_dev, 1e-7));
  }

  write_trajectories_csv(ctx.out / "trajectories.csv", trajs);
  write_summary(ctx.out / "summary.txt", trajs);
  write_trajectory_plot(ctx.out / "plot.gp", "trajectories.csv");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  rw.write(ctx.out / "report.txt", cfg.serialize(), secs);
  log << (rw.all_pass() ? "PASS" : "FAIL") << " two-slit (" << (spin1 ? "spin1" : "spin0") << ")\n";
  return rw.all_pass() ? 0 : 1;
}

int run_coupled(const ScenarioConfig& cfg, const ScenarioContext& ctx, std::ostream& log) {
  const auto t_start = std::chrono::steady_clock::now();
  const double mass = cfg.real("field.m");
  const double e = cfg.real("field.e");
  const GridSpec spec{cfg.real("grid.x0"), cfg.real("grid.x1"), static_cast<int>(cfg.integer("grid.nx")),
                      cfg.real("grid.t0"), cfg.real("grid.t1"), static_cast<int>(cfg.integer("grid.nt"))};
  const GridBoundary bc = cfg.str("grid.boundary") == "periodic" ? GridBoundary::periodic : GridBoundary::dirichlet_zero;
  const std::string pot_name = cfg.str("field.potential");
  Potential1p1 pot = Potential1p1::free();
  if (pot_name == "constant-v0") pot = Potential1p1::constant_v0(cfg.real("field.v0"));
  if (pot_name == "linear-efield") pot = Potential1p1::linear_efield(cfg.real("field.efield"));

  const double sigma = cfg.real("field.packet_sigma");
  const double pk = cfg.real("field.packet_k");
  const double pc = cfg.real("field.packet_center");
  const double energy = std::sqrt(mass * mass + pk * pk);
  auto phi0 = [&](double x) { return std::exp(Complex{-(x - pc) * (x - pc) / (4.0 * sigma * sigma), pk * x}); };
  auto dtphi0 = [&](double x) { return Complex{0.0, -energy} * phi0(x); };

  // The solver validates the stability bound before stepping; surface that as
  // a configuration error (no artifacts are written in that case).
  std::shared_ptr<GridField> grid;
  try {
    grid = std::make_shared<GridField>(GridField::solve_coupled_kg(spec, bc, pot, e, mass, phi0, dtphi0));
  } catch (const std::invalid_argument& err) {
    throw ConfigError(0, "grid", err.what());
  }
  fs::create_directories(ctx.out);

  ReportWriter rw;
  double maxabs = 0.0;
  for (int n = 0; n < spec.nt; ++n)
    for (int j = 0; j < spec.nx; ++j) maxabs = std::max(maxabs, std::abs(grid->phi(n, j)));
  rw.add(check_le("max-amplitude", maxabs, 1e9));

  double qref = grid->charge(1), drift = 0.0;
  for (int n = 2; n + 1 < spec.nt; n += std::max(1, spec.nt / 32)) drift = std::max(drift, std::abs(grid->charge(n) - qref));
  rw.add(check_le("charge-relative-drift", drift / std::max(std::abs(qref), 1e-30), 0.02));

  // Divergence audit record at three interior events near the packet.
  const KemmerField kf = grid_kemmer_field(grid);
  const DkpRep& rep = representation(Spin::spin0);
  TensorFn theta = [&](const Event& ev) { return energy_momentum(rep, kf.psi(ev)); };
  CurrentFn scur = [&](const Event& ev) { return charge_current(rep, kf.psi(ev), mass); };
  const double efield = pot_name == "linear-efield" ? cfg.real("field.efield") : 0.0;
  const Tensor2 ften = constant_efield_tensor(efield);
  std::ofstream divrep(ctx.out / "divergence.txt");
  const double tm = 0.5 * (spec.t0 + spec.t1);
  const double t_aligned = spec.t0 + spec.dt() * std::round((tm - spec.t0) / spec.dt());
  for (int i = -1; i <= 1; ++i) {
    const double x_aligned = spec.x0 + spec.h() * std::round((pc + i * sigma - spec.x0) / spec.h());
    const Event ev{t_aligned, Vec3{x_aligned, 0.0, 0.0}};
    if (!grid->in_domain(ev, 4.0)) continue;
    DivergenceReport r = coupled_divergence_audit(theta, scur, ften, e, ev, spec.h());
    divrep << r.serialize() << "\n";
  }

  {
    std::ofstream os(ctx.out / "grid.dat");
    grid->export_table(os, static_cast<int>(cfg.integer("output.stride_t")), static_cast<int>(cfg.integer("output.stride_x")));
  }
  {
    std::ofstream os(ctx.out / "grid.meta");
    grid->export_metadata(os);
  }
  write_grid_plot(ctx.out / "plot.gp", "grid.dat");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  rw.write(ctx.out / "report.txt", cfg.serialize(), secs);
  log << (rw.all_pass() ? "PASS" : "FAIL") << " coupled-1p1 (" << pot_name << ")\n";
  return rw.all_pass() ? 0 : 1;
}

int run_verify(const ScenarioConfig& cfg, const ScenarioContext& ctx, std::ostream& log) {
  VerifyOptions opt;
  opt.fast = cfg.boolean("verify.fast");
  opt.workers = ctx.workers;
  opt.seed = ctx.seed;
  const std::string scope = cfg.str("verify.scope");
  const std::vector<CriterionResult> results = scope == "acceptance" ? run_acceptance_checks(opt)
                                               : scope == "modules"  ? run_module_checks(opt)
                                                                     : run_all_checks(opt);
  log << format_summary(results);
  log << format_report(results);
  if (!ctx.out.empty()) {
    fs::create_directories(ctx.out);
    std::ofstream os(ctx.out / "report.txt");
    os << format_report(results);
  }
  return all_pass(results) ? 0 : 1;
}

}  // namespace

int run_scenario(const ScenarioConfig& cfg, const RunOverrides& ov, std::ostream& log) {
  const bool needs_dir = cfg.kind() != ScenarioKind::verify_suite;
  const ScenarioContext ctx = make_context(cfg, ov, needs_dir);
  if (needs_dir && cfg.kind() != ScenarioKind::coupled_1p1) fs::create_directories(ctx.out);

  switch (cfg.kind()) {
    case ScenarioKind::single_relativistic:
      return run_single_relativistic(cfg, ctx, log);
    case ScenarioKind::many_relativistic:
      return run_many_relativistic(cfg, ctx, log);
    case ScenarioKind::nr_spin0:
    case ScenarioKind::nr_spin1:
      return run_nr(cfg, ctx, log);
    case ScenarioKind::two_slit:
      return run_two_slit(cfg, ctx, log);
    case ScenarioKind::coupled_1p1:
      return run_coupled(cfg, ctx, log);
    case ScenarioKind::verify_suite:
      return run_verify(cfg, ctx, log);
  }
  return 2;
}

}  // namespace kemmer
