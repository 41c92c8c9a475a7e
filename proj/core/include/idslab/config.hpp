#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "idslab/averaging.hpp"
#include "idslab/measure.hpp"
#include "idslab/operators.hpp"
#include "idslab/transforms.hpp"

namespace idslab {

// One validation problem, tied to the 1-based input line that caused it
// (line 0 for file-level problems).
struct ConfigError {
  int line = 0;
  std::string message;
};

std::string format_errors(const std::vector<ConfigError>& errors);

// One `check = <id> key=value ...` line. Lists (alpha, factor) expand into
// one report per element when the check runs.
struct CheckSpec {
  std::string id;
  int line = 0;
  std::string sigma;                   // measure name (lemma21, lemma23)
  std::string mu;                      // measure name (others)
  std::vector<double> alphas{1.0};     // alpha=
  std::vector<double> factors{2.0};    // c= (thm12-scaling)
  bool translate = false;              // op=translate
  std::string site = "center";        // site= (thm11)
  std::string grid;                    // grid name, inline literal, or "" = auto
  std::string mu_grid;                 // "" = same resolution rule as grid
  std::vector<double> betas;           // thm12-weighted weights
  std::vector<double> modulations;     // thm12-weighted a_n
  std::optional<double> d_mu;          // thm12-weighted override
};

// Monte Carlo sweep request; realizations == 0 means the stage is absent.
struct McConfig {
  int realizations = 0;
  bool seed_set = false;
  std::uint64_t seed = 1;
  std::vector<double> energies;
  std::vector<double> scales;
  std::vector<std::string> sites;  // "center", "center+K", or flat indices
  double alpha = 1.0;              // exponent of the emitted profile
};

struct OutputConfig {
  std::string directory = "out";
  bool csv = true;
  bool json = true;
  bool svg = true;
};

// Fully parsed experiment description. Measures and grids are keyed by name;
// canonical_text() re-serializes in a normalized form whose re-parse is
// byte-stable (sections in fixed order, sorted names, canonical literals).
struct ExperimentConfig {
  std::vector<std::pair<std::string, Measure>> measures;  // sorted by name
  std::optional<OperatorConfig> op;
  std::vector<std::pair<std::string, GridSpec>> grids;  // sorted by name
  QuadratureSpec quadrature;
  McConfig mc;
  OutputConfig output;
  std::vector<CheckSpec> checks;

  const Measure* find_measure(const std::string& name) const;
  const GridSpec* find_grid(const std::string& name) const;
  std::string canonical_text() const;
};

// Parse + validate. Never throws on bad input: every problem is appended to
// `errors` (not fail-fast) and the parts that did parse are returned.
ExperimentConfig parse_config(const std::string& text, std::vector<ConfigError>& errors);
ExperimentConfig load_config(const std::string& path, std::vector<ConfigError>& errors);

// Grid value resolution used by parser and runner: "auto" stays empty here;
// otherwise a named grid or an inline grid(...) literal.
std::optional<GridSpec> parse_grid_literal(const std::string& text, std::string* error);

// "center", "center+K", "center-K", or a flat index; throws
// std::invalid_argument when out of range or malformed.
int resolve_site(const std::string& spec, const OperatorConfig& cfg);

}  // namespace idslab
