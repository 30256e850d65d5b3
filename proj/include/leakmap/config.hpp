#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace leakmap {

/// Every experiment parameter. Defaults follow the reference setup (K = 10,
/// leak width 0.2, n = 10 closed-map iterations, dwell bins of 0.08 and a
/// 1000 x 1000 Husimi grid) with a desk-scale Hilbert space of N = 512.
struct ExperimentConfig {
  // [map]
  double K = 10.0;
  // [quantum]
  int N = 512;
  bool exclude_zero_modes = false;
  bool dump_schur_vectors = false;
  // [classical]
  std::size_t grid_q = 500;
  std::size_t grid_p = 500;
  std::uint64_t t_max = 1000;
  std::uint64_t ftle_iterations = 10;
  std::size_t histogram_bins = 60;
  double cutoff_tolerance = 0.1;
  bool exclude_non_escaping = false;
  std::size_t random_ics = 0;
  // [leak]
  double leak_center = 0.2;
  double leak_width = 0.2;
  // [scan]
  std::size_t scan_count = 50;
  std::uint64_t scan_lambda_min_dwell = 0;  // 0 keeps every trajectory
  // [husimi]
  std::size_t husimi_q = 1000;
  std::size_t husimi_p = 1000;
  std::size_t mean_states = 20;
  double dwell_bin_width = 0.08;
  // [run]
  std::uint64_t seed = 1;
  std::string output_dir = "out";

  bool operator==(const ExperimentConfig&) const = default;
};

/// All dotted keys ("section.key") in serialisation order.
std::vector<std::string> config_keys();

/// Parses the INI-style text format. Unknown keys, malformed lines and bad
/// values are collected and thrown together as a ConfigError; so are
/// validation failures.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical text form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

/// Sets one dotted key. Throws ConfigError for unknown keys or bad values.
void set_config_value(ExperimentConfig& config, std::string_view key, std::string_view value);
std::string get_config_value(const ExperimentConfig& config, std::string_view key);

/// Applies every override, then validates; all problems are reported together.
void apply_overrides(ExperimentConfig& config,
                     const std::vector<std::pair<std::string, std::string>>& overrides);

/// Human-readable list of every constraint the config violates.
std::vector<std::string> config_violations(const ExperimentConfig& config);

/// Throws ConfigError if config_violations() is non-empty.
void validate(const ExperimentConfig& config);

}  // namespace leakmap
