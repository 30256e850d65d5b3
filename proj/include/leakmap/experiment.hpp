#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "leakmap/config.hpp"

namespace leakmap {

struct OutputFile {
  std::string path;  // relative to the output directory
  std::uintmax_t bytes = 0;
  std::string sha256;
};

struct RunManifest {
  std::string command;
  std::string version;
  ExperimentConfig config;
  std::vector<std::pair<std::string, double>> timings;  // phase -> seconds
  std::vector<OutputFile> files;
  nlohmann::json metadata = nlohmann::json::object();

  nlohmann::json to_json() const;
};

/// Hex SHA-256 digest of a file.
std::string sha256_file(const std::filesystem::path& path);

/// Closed-map FTLE field, heatmap and strip-mean scan.
RunManifest cmd_ftle_field(const ExperimentConfig& config);
/// Open classical map: dwell/FTLE fields, histogram, <lambda>_tau, survival, cutoff.
RunManifest cmd_open_classical(const ExperimentConfig& config);
/// Resonance spectrum, mean Husimi of the longest-lived states, Wehrl scatter.
RunManifest cmd_quantum(const ExperimentConfig& config);
/// Classical and quantum leak-position scans with correlation summary.
RunManifest cmd_scan(const ExperimentConfig& config);

/// Dispatches by CLI name: ftle-field, open-classical, quantum, scan.
/// Throws std::invalid_argument for an unknown command.
RunManifest run_command(std::string_view command, const ExperimentConfig& config);

std::vector<std::string> command_names();

}  // namespace leakmap
