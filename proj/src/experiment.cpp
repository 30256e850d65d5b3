#include "leakmap/experiment.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <stdexcept>

#include <openssl/evp.h>

#include "leakmap/classical_ensemble.hpp"
#include "leakmap/error.hpp"
#include "leakmap/io.hpp"
#include "leakmap/numeric.hpp"
#include "leakmap/quantum.hpp"
#include "leakmap/tomography.hpp"

namespace leakmap {

namespace fs = std::filesystem;
using io::format_double;

namespace {

constexpr double kUnitarityTolerance = 1e-12;
constexpr double kMinimumEscapedFraction = 0.99;

class Run {
 public:
  Run(std::string command, const ExperimentConfig& config) : dir_(config.output_dir) {
    validate(config);
    configure_threads_from_environment();
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_))
      throw IoError("cannot create output directory '" + dir_.string() + "'");
    manifest_.command = std::move(command);
    manifest_.version = LEAKMAP_VERSION;
    manifest_.config = config;
    mark_ = std::chrono::steady_clock::now();
  }

  fs::path path(const std::string& name) const { return dir_ / name; }
  nlohmann::json& meta() { return manifest_.metadata; }

  void lap(const std::string& phase) {
    const auto now = std::chrono::steady_clock::now();
    manifest_.timings.emplace_back(phase, std::chrono::duration<double>(now - mark_).count());
    mark_ = now;
  }

  RunManifest finish() {
    for (const auto& entry : fs::recursive_directory_iterator(dir_)) {
      if (!entry.is_regular_file()) continue;
      const fs::path rel = fs::relative(entry.path(), dir_);
      if (rel == "manifest.json") continue;
      manifest_.files.push_back(
          {rel.generic_string(), entry.file_size(), sha256_file(entry.path())});
    }
    std::sort(manifest_.files.begin(), manifest_.files.end(),
              [](const OutputFile& a, const OutputFile& b) { return a.path < b.path; });
    std::ofstream out(dir_ / "manifest.json", std::ios::trunc);
    out << manifest_.to_json().dump(2) << '\n';
    if (!out) throw IoError("cannot write manifest in '" + dir_.string() + "'");
    return manifest_;
  }

 private:
  fs::path dir_;
  RunManifest manifest_;
  std::chrono::steady_clock::time_point mark_;
};

void write_field(Run& run, const std::string& stem, const ScalarField& field, bool csv) {
  const auto& g = field.grid;
  io::write_lcf(run.path(stem + ".lcf"), static_cast<std::uint32_t>(g.n_q),
                static_cast<std::uint32_t>(g.n_p), field.values);
  io::write_pgm(run.path(stem + ".pgm"), g.n_q, g.n_p, field.values, field.mask);
  if (csv) io::write_field_csv(run.path(stem + ".csv"), field);
}

void write_husimi(Run& run, const std::string& stem, const HusimiField& field) {
  io::write_lcf(run.path(stem + ".lcf"), static_cast<std::uint32_t>(field.n_q),
                static_cast<std::uint32_t>(field.n_p), field.mass);
  io::write_pgm(run.path(stem + ".pgm"), field.n_q, field.n_p, field.mass);
}

PhaseSpaceGrid grid_of(const ExperimentConfig& c) { return {c.grid_q, c.grid_p}; }
QuantumParams quantum_of(const ExperimentConfig& c) { return {c.N, c.K}; }
HusimiResolution husimi_of(const ExperimentConfig& c) { return {c.husimi_q, c.husimi_p}; }

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finaliser over (seed, stream)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double argmin_position(std::span<const double> positions, std::span<const double> values) {
  const auto it = std::min_element(values.begin(), values.end());
  return positions[static_cast<std::size_t>(it - values.begin())];
}

double argmax_position(std::span<const double> positions, std::span<const double> values) {
  const auto it = std::max_element(values.begin(), values.end());
  return positions[static_cast<std::size_t>(it - values.begin())];
}

}  // namespace

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["version"] = version;
  nlohmann::json cfg = nlohmann::json::object();
  for (const std::string& key : config_keys()) cfg[key] = get_config_value(config, key);
  j["config"] = cfg;
  j["config_text"] = serialize_config(config);
  nlohmann::json t = nlohmann::json::array();
  for (const auto& [phase, seconds] : timings) t.push_back({{"phase", phase}, {"seconds", seconds}});
  j["timings"] = t;
  nlohmann::json f = nlohmann::json::array();
  for (const OutputFile& file : files)
    f.push_back({{"path", file.path}, {"bytes", file.bytes}, {"sha256", file.sha256}});
  j["files"] = f;
  j["metadata"] = metadata;
  return j;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < len; ++k) {
    out += hex[digest[k] >> 4];
    out += hex[digest[k] & 0xf];
  }
  return out;
}

RunManifest cmd_ftle_field(const ExperimentConfig& config) {
  Run run("ftle-field", config);
  const MapParams params{config.K};
  const ScalarField field = ftle_field(grid_of(config), config.ftle_iterations, params);
  run.lap("ftle_field");
  write_field(run, "ftle_field", field, true);

  const std::vector<double> positions = uniform_positions(config.scan_count);
  std::vector<io::CsvRow> rows;
  std::vector<double> means;
  for (double c : positions) {
    means.push_back(strip_mean_ftle(field, {c, config.leak_width}));
    rows.push_back({format_double(c), format_double(means.back())});
  }
  io::write_csv(run.path("strip_means.csv"), {"q_L", "mean_ftle"}, rows);
  run.meta()["strip_mean_argmax"] = argmax_position(positions, means);
  run.meta()["strip_mean_argmin"] = argmin_position(positions, means);
  run.lap("strip_means");

  if (config.random_ics > 0) {
    const RandomFtleSummary s =
        random_ftle(config.random_ics, config.ftle_iterations, params, stream_seed(config.seed, 0));
    std::vector<io::CsvRow> r;
    for (std::size_t k = 0; k < s.values.size(); ++k)
      r.push_back({std::to_string(k), format_double(s.values[k])});
    io::write_csv(run.path("random_ftle.csv"), {"index", "ftle"}, r);
    run.meta()["random_ftle_mean"] = s.mean;
    run.meta()["random_ftle_standard_error"] = s.standard_error;
    run.lap("random_ics");
  }
  return run.finish();
}

RunManifest cmd_open_classical(const ExperimentConfig& config) {
  Run run("open-classical", config);
  const MapParams params{config.K};
  const Leak leak{config.leak_center, config.leak_width};
  OpenEnsemble ens = dwell_ftle_field(grid_of(config), leak, config.t_max, params, 0);
  run.lap("trajectories");

  const double escaped = ens.escaped_fraction();
  run.meta()["escaped_fraction"] = escaped;
  run.meta()["non_escaping"] = ens.non_escaping;
  run.meta()["started_in_leak"] = ens.started_in_leak;
  if (escaped < kMinimumEscapedFraction)
    run.meta()["warning"] = "fewer than 99% of trajectories escaped; increase classical.t_max";

  const SurvivalCurve curve = survival_from_records(ens.records, config.t_max);
  std::vector<io::CsvRow> srows;
  for (std::size_t n = 0; n < curve.probability.size(); ++n)
    srows.push_back({std::to_string(n), format_double(curve.probability[n])});
  io::write_csv(run.path("survival.csv"), {"n", "P"}, srows);

  const ExponentialTail tail = fit_exponential_tail(curve);
  const std::uint64_t cutoff = short_dwell_cutoff(curve, config.cutoff_tolerance);
  run.meta()["decay_rate"] = tail.rate;
  run.meta()["decay_fit_window"] = {tail.first, tail.last};
  run.meta()["decay_fit_rms_residual"] = tail.rms_residual;
  run.meta()["short_dwell_cutoff"] = cutoff;
  apply_cutoff(ens, cutoff);
  run.lap("survival");

  write_field(run, "dwell_field", ens.dwell, false);
  write_field(run, "open_ftle_field", ens.ftle, true);

  const Histogram hist = ftle_histogram(ens.ftle, config.histogram_bins);
  std::vector<io::CsvRow> hrows;
  for (std::size_t b = 0; b < hist.probability.size(); ++b)
    hrows.push_back({format_double(hist.bin_center(b)), format_double(hist.probability[b])});
  io::write_csv(run.path("ftle_histogram.csv"), {"lambda", "probability"}, hrows);
  run.meta()["histogram_mean"] = hist.mean();

  std::vector<io::CsvRow> drows;
  for (const auto& [tau, avg] : mean_ftle_by_dwell(ens.records))
    drows.push_back({std::to_string(tau), format_double(avg.mean), std::to_string(avg.count)});
  io::write_csv(run.path("ftle_by_dwell.csv"), {"tau", "mean_lambda", "count"}, drows);
  run.lap("statistics");
  return run.finish();
}

RunManifest cmd_quantum(const ExperimentConfig& config) {
  Run run("quantum", config);
  const QuantumParams qp = quantum_of(config);
  const Eigen::MatrixXcd u = build_unitary(qp);
  const double unitarity = unitarity_error(u);
  run.meta()["unitarity_error"] = unitarity;
  if (!(unitarity <= kUnitarityTolerance))
    throw NumericalError("closed propagator fails the unitarity check: " + format_double(unitarity));
  run.lap("unitary");

  const LeakProjector pi = build_projector(qp, {config.leak_center, config.leak_width});
  const ResonanceSet set = resonance_spectrum(open_propagator(u, pi));
  run.meta()["masked_rows"] = pi.removed();
  run.lap("schur");

  std::vector<io::CsvRow> rows;
  for (std::size_t k = 0; k < set.size(); ++k) {
    const auto z = set.eigenvalues(static_cast<Eigen::Index>(k));
    rows.push_back({std::to_string(k + 1), format_double(z.real()), format_double(z.imag()),
                    format_double(set.quasi_angle[k]), format_double(set.decay_rate[k]),
                    format_double(set.dwell_time[k])});
  }
  io::write_csv(run.path("spectrum.csv"), {"k", "re_z", "im_z", "theta", "gamma", "dwell_time"},
                rows);
  if (config.dump_schur_vectors) {
    const auto n = static_cast<std::size_t>(config.N);
    std::vector<double> flat;
    flat.reserve(2 * n * n);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i) {
        const auto v = set.schur_vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
        flat.push_back(v.real());
        flat.push_back(v.imag());
      }
    io::write_lcf(run.path("schur_vectors.lcf"), static_cast<std::uint32_t>(n),
                  static_cast<std::uint32_t>(2 * n), flat);
  }

  const HusimiEvaluator evaluator(config.N, husimi_of(config));
  const WehrlScale scale(evaluator);
  run.meta()["wehrl_reference_entropy"] = scale.reference_entropy();
  write_husimi(run, "mean_husimi", mean_husimi(set, config.mean_states, evaluator));
  run.lap("mean_husimi");

  const EntropyDwellScatter scatter =
      entropy_vs_dwell(set, config.dwell_bin_width, evaluator, scale);
  std::vector<io::CsvRow> wrows;
  double max_sw = 0.0;
  for (std::size_t k = 0; k < scatter.points.size(); ++k) {
    wrows.push_back({format_double(scatter.points[k].dwell_time),
                     format_double(scatter.points[k].s_w), std::to_string(scatter.bin_index[k])});
    max_sw = std::max(max_sw, scatter.points[k].s_w);
  }
  io::write_csv(run.path("wehrl.csv"), {"dwell_time", "s_w", "bin_index"}, wrows);
  std::vector<io::CsvRow> brows;
  for (const EntropyBin& b : scatter.bins)
    brows.push_back({std::to_string(b.index), format_double(b.lo), format_double(b.hi),
                     format_double(b.mean), format_double(b.min), format_double(b.max),
                     std::to_string(b.count)});
  io::write_csv(run.path("wehrl_bins.csv"),
                {"bin_index", "dwell_lo", "dwell_hi", "mean_s_w", "min_s_w", "max_s_w", "count"},
                brows);
  run.meta()["max_wehrl"] = max_sw;
  run.lap("wehrl");
  return run.finish();
}

RunManifest cmd_scan(const ExperimentConfig& config) {
  Run run("scan", config);
  const std::vector<double> positions = uniform_positions(config.scan_count);
  const auto classical =
      leak_scan_classical(positions, grid_of(config), config.leak_width, config.t_max,
                          MapParams{config.K}, config.exclude_non_escaping,
                          config.scan_lambda_min_dwell);
  run.lap("classical_scan");
  const auto quantum = leak_scan_entropy(quantum_of(config), positions, config.leak_width,
                                         husimi_of(config), config.exclude_zero_modes);
  run.lap("quantum_scan");

  std::vector<double> tau, lambda, dwell, wehrl;
  std::vector<io::CsvRow> rows;
  std::vector<io::CsvRow> err_rows;
  std::size_t non_escaping = 0;
  for (std::size_t k = 0; k < positions.size(); ++k) {
    tau.push_back(classical[k].mean_tau);
    lambda.push_back(classical[k].mean_lambda);
    dwell.push_back(quantum[k].mean_dwell);
    wehrl.push_back(quantum[k].mean_wehrl);
    non_escaping += classical[k].non_escaping;
    rows.push_back({format_double(positions[k]), format_double(tau.back()),
                    format_double(lambda.back()), format_double(dwell.back()),
                    format_double(wehrl.back())});
    err_rows.push_back({format_double(positions[k]), format_double(classical[k].se_tau),
                        format_double(classical[k].se_lambda), format_double(quantum[k].se_dwell),
                        format_double(quantum[k].se_wehrl)});
  }
  io::write_csv(run.path("scan.csv"), {"q_L", "mean_tau", "mean_lambda", "mean_T", "mean_SW"},
                rows);
  io::write_csv(run.path("scan_errors.csv"), {"q_L", "se_tau", "se_lambda", "se_T", "se_SW"}, err_rows);

  nlohmann::json corr;
  corr["pearson_tau_T"] = pearson(tau, dwell);
  corr["pearson_lambda_SW"] = pearson(lambda, wehrl);
  corr["pearson_tau_lambda"] = pearson(tau, lambda);
  corr["pearson_T_SW"] = pearson(dwell, wehrl);
  corr["argmin_tau"] = argmin_position(positions, tau);
  corr["argmin_T"] = argmin_position(positions, dwell);
  corr["argmax_lambda"] = argmax_position(positions, lambda);
  corr["argmax_SW"] = argmax_position(positions, wehrl);
  {
    std::ofstream out(run.path("correlation.json"), std::ios::trunc);
    out << corr.dump(2) << '\n';
    if (!out) throw IoError("cannot write correlation summary");
  }
  run.meta()["correlation"] = corr;
  run.meta()["non_escaping_total"] = non_escaping;
  return run.finish();
}

std::vector<std::string> command_names() { return {"ftle-field", "open-classical", "quantum", "scan"}; }

RunManifest run_command(std::string_view command, const ExperimentConfig& config) {
  if (command == "ftle-field") return cmd_ftle_field(config);
  if (command == "open-classical") return cmd_open_classical(config);
  if (command == "quantum") return cmd_quantum(config);
  if (command == "scan") return cmd_scan(config);
  throw std::invalid_argument("unknown command '" + std::string(command) + "'");
}

}  // namespace leakmap
