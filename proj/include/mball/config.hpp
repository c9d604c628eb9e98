#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mball/weights.hpp"

namespace mball {

enum class ExperimentKind { worst, average, christoffel, kernel_check, needle, basis, fit, selftest };
const char* to_string(ExperimentKind k);
ExperimentKind parse_experiment_kind(const std::string& s);

class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& key, const std::string& what)
      : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                           (key.empty() ? std::string() : "key '" + key + "': ") + what),
        line_(line),
        key_(key) {}
  int line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

 private:
  int line_;
  std::string key_;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::worst;
  int dimension = 2;
  Weight weight = Weight::jacobi(0.5);
  std::vector<int> n_values{2, 3, 4, 5, 6, 7, 8};
  double p = 2.0;
  int samples = 2000;
  std::uint64_t seed = 1;
  int restarts = 4;
  double sigma = 1.0;
  std::string out;
  /// Quadrature budget knob: GL nodes per panel for ball measures and
  /// convolutions (0: module defaults).
  int budget = 0;
  /// Input CSV for the fit experiment.
  std::string input;

  bool operator==(const ExperimentConfig& o) const;
};

/// `key = value` lines (# comments, blank lines) or one JSON object.
/// Keys: experiment, dimension, weight, n (`2..16`, `4,8,16` or `8`),
/// n_min, n_max, p, samples, seed, restarts, sigma, out, budget, input.
ExperimentConfig parse_config(const std::string& text);

/// Canonical `key = value` text; parse_config(serialize(c)) == c.
std::string serialize(const ExperimentConfig& c);

/// FNV-1a 64 of serialize(c).
std::uint64_t config_hash(const ExperimentConfig& c);
std::string config_hash_hex(const ExperimentConfig& c);

}  // namespace mball
