#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "leakmap/standard_map.hpp"

namespace leakmap {

/// Cell-centred sampling of the torus: x_ij = ((i + 1/2) / n_q, (j + 1/2) / n_p).
struct PhaseSpaceGrid {
  std::size_t n_q = 500;
  std::size_t n_p = 500;

  std::size_t size() const noexcept { return n_q * n_p; }
  /// Row-major, q index outermost.
  std::size_t index(std::size_t i, std::size_t j) const noexcept { return i * n_p + j; }
  double q_at(std::size_t i) const noexcept;
  double p_at(std::size_t j) const noexcept;
  PhaseSpacePoint point(std::size_t i, std::size_t j) const noexcept { return {q_at(i), p_at(j)}; }
};

/// Throws std::invalid_argument unless both resolutions are >= 2.
void validate(const PhaseSpaceGrid& grid);

struct ScalarField {
  PhaseSpaceGrid grid;
  std::vector<double> values;
  std::vector<std::uint8_t> mask;  // 1 = valid, 0 = discarded

  explicit ScalarField(PhaseSpaceGrid g = {});
  std::size_t valid_count() const noexcept;
  std::vector<double> valid_values() const;
};

struct StripRegion {
  double center = 0.5;
  double width = 0.2;
};

/// Closed-map FTLE at every grid cell, all cells valid.
ScalarField ftle_field(const PhaseSpaceGrid& grid, std::uint64_t n, const MapParams& params);

/// Mean of the valid cells whose q lies in `strip` (uniform measure). Throws
/// std::invalid_argument when the strip contains no cell.
double strip_mean_ftle(const ScalarField& field, const StripRegion& strip);

/// Per-cell escape data for an open map.
struct OpenEnsemble {
  ScalarField dwell;  // tau per cell; masked like `ftle`
  ScalarField ftle;   // lambda^tau per cell; cells with tau < cutoff are masked out
  std::vector<EscapeRecord> records;
  std::size_t started_in_leak = 0;
  std::size_t non_escaping = 0;
  std::uint64_t cutoff = 0;

  /// Fraction of trajectories started outside the leak that escaped by t_max.
  double escaped_fraction() const noexcept;
};

/// Runs evolve_open from every grid cell. Cells with tau < cutoff (which
/// includes every cell starting inside the leak) are masked out.
OpenEnsemble dwell_ftle_field(const PhaseSpaceGrid& grid, const Leak& leak, std::uint64_t t_max,
                              const MapParams& params, std::uint64_t cutoff);

/// Recomputes the masks of an existing ensemble for a new cutoff.
void apply_cutoff(OpenEnsemble& ensemble, std::uint64_t cutoff);

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> probability;  // bin masses, summing to 1

  double bin_width() const noexcept;
  double bin_center(std::size_t b) const noexcept;
  double mean() const noexcept;
};

/// Normalised histogram of the valid values over [min, max]. A field with a
/// single distinct value puts all mass in the first bin. Throws
/// std::invalid_argument for an all-masked field or bins == 0.
Histogram ftle_histogram(const ScalarField& field, std::size_t bins);

struct DwellAverage {
  double mean = 0.0;
  std::size_t count = 0;
};

/// <lambda>_tau over the initial conditions sharing each dwell time. Records
/// that started inside the leak are ignored.
std::map<std::uint64_t, DwellAverage> mean_ftle_by_dwell(std::span<const EscapeRecord> records);

/// P(n) for n = 0..t_max, as a fraction of all initial conditions.
struct SurvivalCurve {
  std::vector<double> probability;

  std::uint64_t t_max() const noexcept {
    return probability.empty() ? 0 : probability.size() - 1;
  }
};

SurvivalCurve survival_from_records(std::span<const EscapeRecord> records, std::uint64_t t_max);

SurvivalCurve survival_probability(const PhaseSpaceGrid& grid, const Leak& leak,
                                   std::uint64_t t_max, const MapParams& params);

/// Least-squares line through ln P over the window lo <= P <= hi.
struct ExponentialTail {
  double rate = 0.0;  // decay rate gamma, P ~ exp(-gamma n)
  double intercept = 0.0;
  std::uint64_t first = 0;
  std::uint64_t last = 0;
  double rms_residual = 0.0;
};

/// Throws NumericalError when fewer than three points fall in the window.
ExponentialTail fit_exponential_tail(const SurvivalCurve& curve, double lo = 1e-3, double hi = 1e-1);

/// Smallest n at which the local log-slope ln P(n) - ln P(n+1) matches the
/// fitted tail rate within relative tolerance, and keeps matching for the
/// next two steps where those exist. Throws NumericalError if no such n.
std::uint64_t short_dwell_cutoff(const SurvivalCurve& curve, double tolerance = 0.1);

struct ClassicalScanPoint {
  double center = 0.0;
  double mean_tau = 0.0;
  double mean_lambda = 0.0;
  double se_tau = 0.0;
  double se_lambda = 0.0;
  std::size_t samples = 0;
  std::size_t non_escaping = 0;
};

/// Leak-position scan averaged over every initial condition outside the leak.
/// Non-escaping trajectories contribute tau = t_max unless excluded.
/// <lambda> is restricted to tau >= lambda_min_dwell; <tau> never is.
std::vector<ClassicalScanPoint> leak_scan_classical(std::span<const double> positions,
                                                    const PhaseSpaceGrid& grid, double width,
                                                    std::uint64_t t_max, const MapParams& params,
                                                    bool exclude_non_escaping = false,
                                                    std::uint64_t lambda_min_dwell = 0);

/// Uniform positions k / count, k = 0..count-1.
std::vector<double> uniform_positions(std::size_t count);

/// Grand-mean FTLE over `count` uniformly random initial conditions.
struct RandomFtleSummary {
  double mean = 0.0;
  double standard_error = 0.0;
  std::vector<double> values;
};

RandomFtleSummary random_ftle(std::size_t count, std::uint64_t n, const MapParams& params,
                              std::uint64_t seed);

}  // namespace leakmap
