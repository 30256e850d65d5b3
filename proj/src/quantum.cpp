#include "leakmap/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "leakmap/numeric.hpp"
#include "leakmap/schur.hpp"

namespace leakmap {

namespace {
constexpr double kPi = std::numbers::pi;
}

Eigen::MatrixXcd build_unitary(const QuantumParams& params) {
  const int n = params.N;
  if (n < 2) throw std::invalid_argument("build_unitary: N must be >= 2");
  const double norm = 1.0 / std::sqrt(static_cast<double>(n));
  const auto two_n = 2 * static_cast<std::int64_t>(n);

  // exp(i pi d^2 / N) has period 2N in d^2; reduce before scaling.
  std::vector<std::complex<double>> free_phase(n);
  for (int d = 0; d < n; ++d) {
    const auto d2 = (static_cast<std::int64_t>(d) * d) % two_n;
    free_phase[d] = std::polar(norm, kPi * static_cast<double>(d2) / n);
  }
  std::vector<std::complex<double>> kick(n);
  const double amplitude = n * params.K / (2.0 * kPi);
  for (int kp = 1; kp <= n; ++kp)
    kick[kp - 1] = std::polar(1.0, amplitude * std::cos(2.0 * kPi * kp / n));

  Eigen::MatrixXcd u(n, n);
  for (int kp = 0; kp < n; ++kp)
    for (int k = 0; k < n; ++k) u(k, kp) = free_phase[std::abs(k - kp)] * kick[kp];
  return u;
}

double unitarity_error(const Eigen::MatrixXcd& u) {
  const Eigen::MatrixXcd g = u.adjoint() * u;
  return (g - Eigen::MatrixXcd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

std::size_t LeakProjector::removed() const noexcept {
  return static_cast<std::size_t>(std::count(survives.begin(), survives.end(), std::uint8_t{0}));
}

LeakProjector build_projector(const QuantumParams& params, const Leak& leak) {
  if (params.N < 2) throw std::invalid_argument("build_projector: N must be >= 2");
  validate(leak);
  LeakProjector pi;
  pi.survives.resize(static_cast<std::size_t>(params.N));
  for (int k = 1; k <= params.N; ++k) {
    const double q = wrap_unit(static_cast<double>(k) / params.N);
    pi.survives[k - 1] = in_leak({q, 0.0}, leak) ? 0 : 1;
  }
  return pi;
}

Eigen::MatrixXcd open_propagator(const Eigen::MatrixXcd& u, const LeakProjector& projector) {
  if (u.rows() != u.cols() || static_cast<std::size_t>(u.rows()) != projector.size())
    throw std::invalid_argument("open_propagator: dimension mismatch between U and projector");
  Eigen::MatrixXcd out = u;
  for (Eigen::Index k = 0; k < out.rows(); ++k)
    if (!projector.survives[static_cast<std::size_t>(k)]) out.row(k).setZero();
  return out;
}

ResonanceSet resonance_spectrum(const Eigen::MatrixXcd& open) {
  SchurFactorization f = complex_schur(open);
  sort_by_modulus(f);

  const Eigen::Index n = f.T.rows();
  ResonanceSet set;
  set.eigenvalues = f.T.diagonal();
  set.quasi_angle.resize(n);
  set.decay_rate.resize(n);
  set.dwell_time.resize(n);
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < n; ++k) {
    const std::complex<double> z = set.eigenvalues(k);
    const double modulus = std::abs(z);
    set.quasi_angle[k] = std::arg(z);
    if (modulus < kZeroModeModulus) {
      set.decay_rate[k] = inf;
      set.dwell_time[k] = 0.0;
      continue;
    }
    const double gamma = std::max(0.0, -2.0 * std::log(modulus));
    set.decay_rate[k] = gamma;
    set.dwell_time[k] = gamma < kClosedDecayFloor ? inf : 1.0 / gamma;
  }
  set.schur_vectors = std::move(f.V);
  set.triangular = std::move(f.T);
  return set;
}

ResonanceSet resonances_for_leak(const QuantumParams& params, const Leak& leak) {
  const Eigen::MatrixXcd u = build_unitary(params);
  return resonance_spectrum(open_propagator(u, build_projector(params, leak)));
}

std::vector<double> finite_dwell_times(const ResonanceSet& set, bool exclude_zero_modes) {
  std::vector<double> finite;
  finite.reserve(set.size());
  for (std::size_t k = 0; k < set.size(); ++k) {
    const double t = set.dwell_time[k];
    if (std::isinf(t)) continue;
    if (exclude_zero_modes && t == 0.0) continue;
    finite.push_back(t);
  }
  return finite;
}

double mean_dwell_time(const ResonanceSet& set, bool exclude_zero_modes) {
  const std::vector<double> finite = finite_dwell_times(set, exclude_zero_modes);
  if (finite.empty()) return std::numeric_limits<double>::infinity();
  return mean(finite);
}

std::vector<QuantumScanPoint> leak_scan_quantum(const QuantumParams& params,
                                                std::span<const double> positions, double width,
                                                bool exclude_zero_modes) {
  const Eigen::MatrixXcd u = build_unitary(params);
  std::vector<QuantumScanPoint> out;
  out.reserve(positions.size());
  for (double center : positions) {
    const ResonanceSet set =
        resonance_spectrum(open_propagator(u, build_projector(params, {center, width})));
    QuantumScanPoint pt;
    pt.center = center;
    const std::vector<double> finite = finite_dwell_times(set, exclude_zero_modes);
    pt.mean_dwell = finite.empty() ? std::numeric_limits<double>::infinity() : mean(finite);
    pt.se_dwell = standard_error(finite);
    pt.zero_modes = static_cast<std::size_t>(
        std::count(set.dwell_time.begin(), set.dwell_time.end(), 0.0));
    out.push_back(pt);
  }
  return out;
}

}  // namespace leakmap
