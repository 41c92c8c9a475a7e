#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "idslab/averaging.hpp"
#include "idslab/config.hpp"

namespace idslab {

inline constexpr const char* kToolVersion = "0.1.0";

struct FormatSet {
  bool csv = true;
  bool json = true;
  bool svg = true;
};

struct RunOptions {
  std::optional<std::uint64_t> seed;     // overrides [mc] seed
  std::optional<std::string> out_dir;    // overrides [output] directory
  std::optional<FormatSet> formats;      // overrides [output] formats
  int workers = 0;                       // <= 0: resolve from env, then hardware
};

struct StageTime {
  std::string stage;
  double milliseconds;
};

// Exit codes: 0 all good, 1 at least one failed check, 3 stage error.
// (2 is reserved for config validation failures, reported by the CLI.)
struct RunResult {
  int exit_code = 0;
  std::vector<BoundReport> reports;
  std::vector<std::string> artifacts;  // paths relative to the output directory
  std::vector<StageTime> stages;
  std::string out_dir;
  std::string error;  // nonempty iff exit_code == 3
};

// Worker-count resolution: explicit positive flag wins, then the
// IDSLAB_WORKERS environment variable, then hardware concurrency.
int resolve_workers(int flag_value);

std::uint64_t fnv1a64(const std::string& data);

// Runs all stages (mc sweep, checks, reports, plots) and writes the
// artifacts plus run_manifest.json into the output directory. CSV and JSON
// bytes depend only on (config, seed, version), never on worker count;
// the manifest additionally records wall-clock times.
RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opt = {});

}  // namespace idslab
