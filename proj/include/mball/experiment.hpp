#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mball/config.hpp"

namespace mball {

struct RunOptions {
  std::optional<std::uint64_t> seed;
  /// Worker cap for n-parallel loops and Monte Carlo shards.
  int threads = 1;
  /// Also emit the quadrature rule used for each n.
  bool dump_rule = false;
};

/// One summary check. Asserted checks decide the exit status; the others are
/// reported growth windows.
struct Check {
  std::string name;
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool passed = false;
  bool asserted = false;
};

struct ExperimentRecord {
  ExperimentConfig config;
  std::string config_text;
  std::string hash;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<Check> checks;
  /// Extra CSV files (name, contents), e.g. dumped rules or a basis.
  std::vector<std::pair<std::string, std::string>> attachments;
  double wall_seconds = 0.0;

  /// All asserted checks passed.
  bool passed() const;
  /// Rows with config_hash appended as the last column.
  std::string csv() const;
  std::string summary_json() const;
};

ExperimentRecord run(const ExperimentConfig& config, const RunOptions& opt = {});

/// Writes <kind>.csv, <kind>.summary.json and the attachments into `dir`
/// (created if missing).
void write_outputs(const ExperimentRecord& rec, const std::string& dir);

/// Threads from MBALL_THREADS (>= 1), else `fallback`.
int threads_from_env(int fallback = 1);

}  // namespace mball
