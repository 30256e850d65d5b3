#include "leakmap/classical_ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "leakmap/error.hpp"
#include "leakmap/numeric.hpp"

namespace leakmap {

double PhaseSpaceGrid::q_at(std::size_t i) const noexcept {
  return (static_cast<double>(i) + 0.5) / static_cast<double>(n_q);
}

double PhaseSpaceGrid::p_at(std::size_t j) const noexcept {
  return (static_cast<double>(j) + 0.5) / static_cast<double>(n_p);
}

void validate(const PhaseSpaceGrid& grid) {
  if (grid.n_q < 2 || grid.n_p < 2)
    throw std::invalid_argument("phase-space grid needs at least 2 cells per axis");
}

ScalarField::ScalarField(PhaseSpaceGrid g)
    : grid(g), values(g.size(), 0.0), mask(g.size(), 1) {}

std::size_t ScalarField::valid_count() const noexcept {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

std::vector<double> ScalarField::valid_values() const {
  std::vector<double> out;
  out.reserve(valid_count());
  for (std::size_t c = 0; c < values.size(); ++c)
    if (mask[c]) out.push_back(values[c]);
  return out;
}

ScalarField ftle_field(const PhaseSpaceGrid& grid, std::uint64_t n, const MapParams& params) {
  validate(grid);
  if (n == 0) throw std::invalid_argument("ftle_field: iteration count must be >= 1");
  ScalarField field(grid);
  const auto cells = static_cast<std::int64_t>(grid.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < cells; ++c) {
    const auto i = static_cast<std::size_t>(c) / grid.n_p;
    const auto j = static_cast<std::size_t>(c) % grid.n_p;
    field.values[static_cast<std::size_t>(c)] = ftle(grid.point(i, j), n, params);
  }
  return field;
}

double strip_mean_ftle(const ScalarField& field, const StripRegion& strip) {
  const auto& g = field.grid;
  std::vector<double> selected;
  for (std::size_t i = 0; i < g.n_q; ++i) {
    if (!in_periodic_interval(g.q_at(i), strip.center, strip.width)) continue;
    for (std::size_t j = 0; j < g.n_p; ++j) {
      const std::size_t c = g.index(i, j);
      if (field.mask[c]) selected.push_back(field.values[c]);
    }
  }
  if (selected.empty())
    throw std::invalid_argument("strip_mean_ftle: strip contains no grid cell");
  return mean(selected);
}

double OpenEnsemble::escaped_fraction() const noexcept {
  const std::size_t started_outside = records.size() - started_in_leak;
  if (started_outside == 0) return 1.0;
  return 1.0 - static_cast<double>(non_escaping) / static_cast<double>(started_outside);
}

OpenEnsemble dwell_ftle_field(const PhaseSpaceGrid& grid, const Leak& leak, std::uint64_t t_max,
                              const MapParams& params, std::uint64_t cutoff) {
  validate(grid);
  validate(leak);
  if (t_max == 0) throw std::invalid_argument("dwell_ftle_field: t_max must be >= 1");
  OpenEnsemble out{ScalarField(grid), ScalarField(grid), std::vector<EscapeRecord>(grid.size()),
                   0, 0, cutoff};
  const auto cells = static_cast<std::int64_t>(grid.size());
#pragma omp parallel for schedule(dynamic, 256)
  for (std::int64_t c = 0; c < cells; ++c) {
    const auto i = static_cast<std::size_t>(c) / grid.n_p;
    const auto j = static_cast<std::size_t>(c) % grid.n_p;
    out.records[static_cast<std::size_t>(c)] = evolve_open(grid.point(i, j), leak, t_max, params);
  }
  for (std::size_t c = 0; c < out.records.size(); ++c) {
    const EscapeRecord& r = out.records[c];
    out.dwell.values[c] = static_cast<double>(r.tau);
    out.ftle.values[c] = r.started_in_leak ? 0.0 : r.lambda;
    if (r.started_in_leak) ++out.started_in_leak;
    if (!r.escaped) ++out.non_escaping;
  }
  apply_cutoff(out, cutoff);
  return out;
}

void apply_cutoff(OpenEnsemble& ensemble, std::uint64_t cutoff) {
  ensemble.cutoff = cutoff;
  for (std::size_t c = 0; c < ensemble.records.size(); ++c) {
    const EscapeRecord& r = ensemble.records[c];
    const std::uint8_t valid = (!r.started_in_leak && r.tau >= cutoff) ? 1 : 0;
    ensemble.dwell.mask[c] = valid;
    ensemble.ftle.mask[c] = valid;
  }
}

double Histogram::bin_width() const noexcept {
  return probability.empty() ? 0.0 : (hi - lo) / static_cast<double>(probability.size());
}

double Histogram::bin_center(std::size_t b) const noexcept {
  return lo + (static_cast<double>(b) + 0.5) * bin_width();
}

double Histogram::mean() const noexcept {
  std::vector<double> terms(probability.size());
  for (std::size_t b = 0; b < probability.size(); ++b) terms[b] = probability[b] * bin_center(b);
  return compensated_sum(terms);
}

Histogram ftle_histogram(const ScalarField& field, std::size_t bins) {
  if (bins == 0) throw std::invalid_argument("ftle_histogram: bins must be >= 1");
  const std::vector<double> values = field.valid_values();
  if (values.empty()) throw std::invalid_argument("ftle_histogram: every cell is masked");
  const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
  Histogram h{*min_it, *max_it, std::vector<double>(bins, 0.0)};
  std::vector<std::size_t> counts(bins, 0);
  const double width = h.hi - h.lo;
  for (double v : values) {
    std::size_t b = 0;
    if (width > 0.0) {
      b = static_cast<std::size_t>((v - h.lo) / width * static_cast<double>(bins));
      b = std::min(b, bins - 1);
    }
    ++counts[b];
  }
  for (std::size_t b = 0; b < bins; ++b)
    h.probability[b] = static_cast<double>(counts[b]) / static_cast<double>(values.size());
  return h;
}

std::map<std::uint64_t, DwellAverage> mean_ftle_by_dwell(std::span<const EscapeRecord> records) {
  std::map<std::uint64_t, std::vector<double>> groups;
  for (const EscapeRecord& r : records) {
    if (r.started_in_leak) continue;
    groups[r.tau].push_back(r.lambda);
  }
  std::map<std::uint64_t, DwellAverage> out;
  for (const auto& [tau, lambdas] : groups) out[tau] = {mean(lambdas), lambdas.size()};
  return out;
}

SurvivalCurve survival_from_records(std::span<const EscapeRecord> records, std::uint64_t t_max) {
  // survivors[n] counts trajectories still inside at iteration n.
  std::vector<std::size_t> escapes_at(t_max + 2, 0);
  for (const EscapeRecord& r : records) {
    if (!r.escaped) continue;  // survives through t_max
    ++escapes_at[std::min<std::uint64_t>(r.tau, t_max + 1)];
  }
  SurvivalCurve curve;
  curve.probability.resize(t_max + 1);
  const double total = static_cast<double>(records.size());
  std::size_t gone = 0;
  for (std::uint64_t n = 0; n <= t_max; ++n) {
    gone += escapes_at[n];
    curve.probability[n] = total > 0 ? static_cast<double>(records.size() - gone) / total : 0.0;
  }
  return curve;
}

SurvivalCurve survival_probability(const PhaseSpaceGrid& grid, const Leak& leak,
                                   std::uint64_t t_max, const MapParams& params) {
  const OpenEnsemble ens = dwell_ftle_field(grid, leak, t_max, params, 0);
  return survival_from_records(ens.records, t_max);
}

ExponentialTail fit_exponential_tail(const SurvivalCurve& curve, double lo, double hi) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t n = 0; n < curve.probability.size(); ++n) {
    const double p = curve.probability[n];
    if (p >= lo && p <= hi && p > 0.0) {
      xs.push_back(static_cast<double>(n));
      ys.push_back(std::log(p));
    }
  }
  if (xs.size() < 3)
    throw NumericalError("survival curve has fewer than three points in the exponential window");
  const double mx = mean(xs);
  const double my = mean(ys);
  std::vector<double> sxy(xs.size()), sxx(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxy[k] = (xs[k] - mx) * (ys[k] - my);
    sxx[k] = (xs[k] - mx) * (xs[k] - mx);
  }
  const double slope = compensated_sum(sxy) / compensated_sum(sxx);
  ExponentialTail tail;
  tail.rate = -slope;
  tail.intercept = my - slope * mx;
  tail.first = static_cast<std::uint64_t>(xs.front());
  tail.last = static_cast<std::uint64_t>(xs.back());
  std::vector<double> res2(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double r = ys[k] - (tail.intercept + slope * xs[k]);
    res2[k] = r * r;
  }
  tail.rms_residual = std::sqrt(compensated_sum(res2) / static_cast<double>(xs.size()));
  return tail;
}

std::uint64_t short_dwell_cutoff(const SurvivalCurve& curve, double tolerance) {
  const ExponentialTail tail = fit_exponential_tail(curve);
  if (!(tail.rate > 0.0)) throw NumericalError("survival tail does not decay");
  const auto& P = curve.probability;
  auto slope_matches = [&](std::size_t n) {
    if (n + 1 >= P.size() || P[n + 1] <= 0.0) return false;
    const double slope = std::log(P[n]) - std::log(P[n + 1]);
    return std::abs(slope - tail.rate) <= tolerance * tail.rate;
  };
  auto slope_defined = [&](std::size_t n) { return n + 1 < P.size() && P[n + 1] > 0.0; };
  constexpr std::size_t kPersistence = 3;
  for (std::size_t n = 0; n + 1 < P.size(); ++n) {
    if (P[n] <= 0.0) break;
    bool ok = true;
    for (std::size_t k = n; k < n + kPersistence && slope_defined(k); ++k) {
      if (!slope_matches(k)) {
        ok = false;
        break;
      }
    }
    if (ok && slope_matches(n)) return n;
  }
  throw NumericalError("no exponential regime found within t_max");
}

std::vector<ClassicalScanPoint> leak_scan_classical(std::span<const double> positions,
                                                    const PhaseSpaceGrid& grid, double width,
                                                    std::uint64_t t_max, const MapParams& params,
                                                    bool exclude_non_escaping,
                                                    std::uint64_t lambda_min_dwell) {
  std::vector<ClassicalScanPoint> out;
  out.reserve(positions.size());
  for (double center : positions) {
    const OpenEnsemble ens = dwell_ftle_field(grid, {center, width}, t_max, params, 0);
    std::vector<double> taus;
    std::vector<double> lambdas;
    for (const EscapeRecord& r : ens.records) {
      if (r.started_in_leak) continue;
      if (exclude_non_escaping && !r.escaped) continue;
      taus.push_back(static_cast<double>(r.tau));
      if (r.tau >= lambda_min_dwell) lambdas.push_back(r.lambda);
    }
    ClassicalScanPoint pt;
    pt.center = center;
    pt.samples = taus.size();
    pt.non_escaping = ens.non_escaping;
    // Every start inside the leak (width 1): all dwell times are 0.
    pt.mean_tau = taus.empty() ? 0.0 : mean(taus);
    pt.mean_lambda = mean(lambdas);
    pt.se_tau = standard_error(taus);
    pt.se_lambda = standard_error(lambdas);
    out.push_back(pt);
  }
  return out;
}

std::vector<double> uniform_positions(std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k)
    out[k] = static_cast<double>(k) / static_cast<double>(count);
  return out;
}

RandomFtleSummary random_ftle(std::size_t count, std::uint64_t n, const MapParams& params,
                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<PhaseSpacePoint> ics(count);
  for (auto& x : ics) {
    x.q = unit(rng);
    x.p = unit(rng);
  }
  RandomFtleSummary s;
  s.values.resize(count);
  const auto total = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t k = 0; k < total; ++k)
    s.values[static_cast<std::size_t>(k)] = ftle(ics[static_cast<std::size_t>(k)], n, params);
  s.mean = mean(s.values);
  s.standard_error = standard_error(s.values);
  return s;
}

}  // namespace leakmap
