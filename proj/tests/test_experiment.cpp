#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "leakmap/config.hpp"
#include "leakmap/error.hpp"
#include "leakmap/experiment.hpp"
#include "leakmap/io.hpp"

using namespace leakmap;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config(const std::string& name) {
  ExperimentConfig c;
  c.grid_q = 40;
  c.grid_p = 30;
  c.t_max = 400;
  c.N = 32;
  c.husimi_q = 48;
  c.husimi_p = 40;
  c.mean_states = 5;
  c.scan_count = 6;
  c.random_ics = 50;
  c.histogram_bins = 20;
  const fs::path dir = fs::temp_directory_path() / ("leakmap_run_" + name);
  fs::remove_all(dir);
  c.output_dir = dir.string();
  return c;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::set<std::string> listed_files(const RunManifest& m) {
  std::set<std::string> out;
  for (const OutputFile& f : m.files) out.insert(f.path);
  return out;
}

std::map<std::string, std::string> digests(const RunManifest& m) {
  std::map<std::string, std::string> out;
  for (const OutputFile& f : m.files) out[f.path] = f.sha256;
  return out;
}

void expect_manifest_consistent(const ExperimentConfig& c, const RunManifest& m) {
  const fs::path dir = c.output_dir;
  ASSERT_TRUE(fs::exists(dir / "manifest.json"));
  std::ifstream in(dir / "manifest.json");
  const auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j["command"], m.command);
  EXPECT_FALSE(j["version"].get<std::string>().empty());
  EXPECT_EQ(parse_config(j["config_text"].get<std::string>()), c);
  EXPECT_EQ(j["config"].size(), config_keys().size());
  EXPECT_FALSE(j["timings"].empty());
  for (const auto& t : j["timings"]) EXPECT_GE(t["seconds"].get<double>(), 0.0);
  ASSERT_EQ(j["files"].size(), m.files.size());
  for (const OutputFile& f : m.files) {
    EXPECT_EQ(fs::file_size(dir / f.path), f.bytes) << f.path;
    EXPECT_EQ(sha256_file(dir / f.path), f.sha256) << f.path;
    EXPECT_EQ(f.sha256.size(), 64u);
  }
}

}  // namespace

TEST(Sha256, KnownDigest) {
  const fs::path path = fs::temp_directory_path() / "leakmap_sha_abc.txt";
  {
    std::ofstream out(path, std::ios::binary);
    out << "abc";
  }
  EXPECT_EQ(sha256_file(path), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_THROW(sha256_file(path.string() + ".missing"), IoError);
}

TEST(Commands, Names) {
  EXPECT_EQ(command_names(),
            (std::vector<std::string>{"ftle-field", "open-classical", "quantum", "scan"}));
  EXPECT_THROW(run_command("nonsense", small_config("bad")), std::invalid_argument);
}

TEST(Commands, InvalidConfigRejectedBeforeWriting) {
  ExperimentConfig c = small_config("invalid");
  c.leak_width = 1.5;
  EXPECT_THROW(run_command("ftle-field", c), ConfigError);
  EXPECT_FALSE(fs::exists(c.output_dir));
}

TEST(Commands, UnwritableOutputIsAnIoError) {
  ExperimentConfig c = small_config("blocked");
  fs::create_directories(fs::path(c.output_dir).parent_path());
  {
    std::ofstream out(c.output_dir);
    out << "a file, not a directory";
  }
  EXPECT_THROW(run_command("ftle-field", c), IoError);
  fs::remove(c.output_dir);
}

TEST(FtleFieldCommand, OutputsAndMetadata) {
  const ExperimentConfig c = small_config("ftle");
  const RunManifest m = cmd_ftle_field(c);
  EXPECT_EQ(m.command, "ftle-field");
  expect_manifest_consistent(c, m);
  const std::set<std::string> expected{"ftle_field.lcf", "ftle_field.pgm", "ftle_field.json",
                                       "ftle_field.csv", "strip_means.csv", "random_ftle.csv"};
  EXPECT_EQ(listed_files(m), expected);

  const io::LcfMatrix field = io::read_lcf(fs::path(c.output_dir) / "ftle_field.lcf");
  EXPECT_EQ(field.rows, 40u);
  EXPECT_EQ(field.cols, 30u);
  const auto strips = read_csv(fs::path(c.output_dir) / "strip_means.csv");
  ASSERT_EQ(strips.size(), 7u);
  EXPECT_EQ(strips[0], (std::vector<std::string>{"q_L", "mean_ftle"}));
  EXPECT_EQ(read_csv(fs::path(c.output_dir) / "random_ftle.csv").size(), 51u);
  EXPECT_TRUE(m.metadata.contains("strip_mean_argmax"));
  EXPECT_GT(m.metadata["random_ftle_mean"].get<double>(), 0.0);
}

TEST(FtleFieldCommand, RerunIsByteIdentical) {
  const ExperimentConfig c = small_config("ftle_rerun");
  const auto first = digests(cmd_ftle_field(c));
  const auto second = digests(cmd_ftle_field(c));
  EXPECT_EQ(first, second);
}

TEST(OpenClassicalCommand, OutputsAndMetadata) {
  ExperimentConfig c = small_config("open");
  c.grid_q = 200;
  c.grid_p = 200;
  const RunManifest m = cmd_open_classical(c);
  expect_manifest_consistent(c, m);
  const fs::path dir = c.output_dir;
  for (const char* name :
       {"survival.csv", "dwell_field.lcf", "dwell_field.pgm", "open_ftle_field.lcf",
        "open_ftle_field.pgm", "open_ftle_field.csv", "ftle_histogram.csv", "ftle_by_dwell.csv"})
    EXPECT_TRUE(listed_files(m).count(name)) << name;

  const auto survival = read_csv(dir / "survival.csv");
  ASSERT_EQ(survival.size(), c.t_max + 2);
  EXPECT_NEAR(std::stod(survival[1][1]), 1.0 - c.leak_width, 1e-12);
  for (std::size_t r = 2; r < survival.size(); ++r)
    EXPECT_LE(std::stod(survival[r][1]), std::stod(survival[r - 1][1]));

  const auto hist = read_csv(dir / "ftle_histogram.csv");
  ASSERT_EQ(hist.size(), c.histogram_bins + 1);
  double total = 0.0;
  for (std::size_t r = 1; r < hist.size(); ++r) total += std::stod(hist[r][1]);
  EXPECT_NEAR(total, 1.0, 1e-12);

  EXPECT_TRUE(m.metadata.contains("short_dwell_cutoff"));
  EXPECT_GE(m.metadata["escaped_fraction"].get<double>(), 0.99);
  EXPECT_GT(m.metadata["decay_rate"].get<double>(), 0.0);
  EXPECT_FALSE(m.metadata.contains("warning"));
}

TEST(OpenClassicalCommand, WarnsWhenTooFewEscape) {
  ExperimentConfig c = small_config("open_short");
  c.grid_q = 200;
  c.grid_p = 200;
  c.leak_width = 0.05;
  c.t_max = 60;
  const RunManifest m = cmd_open_classical(c);
  EXPECT_LT(m.metadata["escaped_fraction"].get<double>(), 0.99);
  EXPECT_TRUE(m.metadata.contains("warning"));
}

TEST(OpenClassicalCommand, NoExponentialWindowIsANumericalError) {
  ExperimentConfig c = small_config("open_none");
  c.leak_width = 0.05;
  c.t_max = 10;
  EXPECT_THROW(cmd_open_classical(c), NumericalError);
}

TEST(QuantumCommand, OutputsAndMetadata) {
  ExperimentConfig c = small_config("quantum");
  c.dump_schur_vectors = true;
  const RunManifest m = cmd_quantum(c);
  expect_manifest_consistent(c, m);
  const fs::path dir = c.output_dir;

  const auto spectrum = read_csv(dir / "spectrum.csv");
  ASSERT_EQ(spectrum.size(), static_cast<std::size_t>(c.N) + 1);
  EXPECT_EQ(spectrum[0],
            (std::vector<std::string>{"k", "re_z", "im_z", "theta", "gamma", "dwell_time"}));
  for (std::size_t r = 2; r < spectrum.size(); ++r)
    EXPECT_GE(std::hypot(std::stod(spectrum[r - 1][1]), std::stod(spectrum[r - 1][2])),
              std::hypot(std::stod(spectrum[r][1]), std::stod(spectrum[r][2])));

  const io::LcfMatrix schur = io::read_lcf(dir / "schur_vectors.lcf");
  EXPECT_EQ(schur.rows, 32u);
  EXPECT_EQ(schur.cols, 64u);
  double norm = 0.0;
  for (std::size_t i = 0; i < 64; ++i) norm += schur.values[i] * schur.values[i];
  EXPECT_NEAR(norm, 1.0, 1e-12);

  const io::LcfMatrix husimi = io::read_lcf(dir / "mean_husimi.lcf");
  EXPECT_EQ(husimi.rows, c.husimi_q);
  EXPECT_EQ(husimi.cols, c.husimi_p);
  double mass = 0.0;
  for (double v : husimi.values) mass += v;
  EXPECT_NEAR(mass, 1.0, 1e-10);

  const auto wehrl = read_csv(dir / "wehrl.csv");
  EXPECT_EQ(wehrl.size(), static_cast<std::size_t>(c.N) + 1);
  for (std::size_t r = 1; r < wehrl.size(); ++r) {
    const double s = std::stod(wehrl[r][1]);
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
  }
  EXPECT_LE(m.metadata["unitarity_error"].get<double>(), 1e-12);
  EXPECT_EQ(m.metadata["masked_rows"].get<std::size_t>(), 6u);  // floor or ceil of 32 * 0.2
}

TEST(QuantumCommand, SchurDumpIsOptIn) {
  const ExperimentConfig c = small_config("quantum_nodump");
  const RunManifest m = cmd_quantum(c);
  EXPECT_FALSE(listed_files(m).count("schur_vectors.lcf"));
}

TEST(ScanCommand, OutputsAndDeterminism) {
  const ExperimentConfig c = small_config("scan");
  const RunManifest m = cmd_scan(c);
  expect_manifest_consistent(c, m);
  const fs::path dir = c.output_dir;
  const auto scan = read_csv(dir / "scan.csv");
  ASSERT_EQ(scan.size(), c.scan_count + 1);
  EXPECT_EQ(scan[0],
            (std::vector<std::string>{"q_L", "mean_tau", "mean_lambda", "mean_T", "mean_SW"}));
  EXPECT_EQ(read_csv(dir / "scan_errors.csv").size(), c.scan_count + 1);
  for (std::size_t r = 1; r < scan.size(); ++r)
    EXPECT_NEAR(std::stod(scan[r][0]), (r - 1) / 6.0, 1e-15);

  std::ifstream in(dir / "correlation.json");
  const auto corr = nlohmann::json::parse(in);
  for (const char* key : {"pearson_tau_T", "pearson_lambda_SW", "argmin_tau", "argmin_T",
                          "argmax_lambda", "argmax_SW"})
    EXPECT_TRUE(corr.contains(key)) << key;
  EXPECT_EQ(m.metadata["correlation"], corr);

  const auto first = digests(m);
  EXPECT_EQ(digests(cmd_scan(c)), first);
}
