#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "leakmap/standard_map.hpp"

namespace leakmap {

/// Quantised standard map on the torus: Hilbert-space dimension N = 2 pi / hbar,
/// position basis q = k / N with k = 1..N (stored at index k - 1).
struct QuantumParams {
  int N = 512;
  double K = 10.0;
};

/// One-kick Floquet operator
///   U_{k,k'} = N^{-1/2} exp[i pi (k - k')^2 / N + i (N K / 2 pi) cos(2 pi k' / N)].
/// Throws std::invalid_argument for N < 2.
Eigen::MatrixXcd build_unitary(const QuantumParams& params);

/// max |U^H U - I|
double unitarity_error(const Eigen::MatrixXcd& u);

/// Diagonal projector onto the complement of a leak, as a per-position mask.
struct LeakProjector {
  std::vector<std::uint8_t> survives;  // index k - 1; 1 = kept, 0 = inside the leak

  std::size_t size() const noexcept { return survives.size(); }
  std::size_t removed() const noexcept;
};

LeakProjector build_projector(const QuantumParams& params, const Leak& leak);

/// Pi U: rows of U at leaked positions are zeroed.
Eigen::MatrixXcd open_propagator(const Eigen::MatrixXcd& u, const LeakProjector& projector);

/// Eigenvalues z_k of the open propagator with an orthonormal Schur basis,
/// ordered by non-increasing |z_k| (equivalently non-increasing dwell time).
struct ResonanceSet {
  Eigen::VectorXcd eigenvalues;
  std::vector<double> quasi_angle;  // arg z_k
  std::vector<double> decay_rate;   // -2 ln |z_k|; +inf for zero modes
  std::vector<double> dwell_time;   // 1 / decay_rate; +inf for |z| = 1, 0 for zero modes
  Eigen::MatrixXcd schur_vectors;   // columns v_k
  Eigen::MatrixXcd triangular;      // V^H U~ V

  std::size_t size() const noexcept { return static_cast<std::size_t>(eigenvalues.size()); }
};

/// |z| below which a resonance is a zero mode (Gamma = inf, T = 0).
inline constexpr double kZeroModeModulus = 1e-14;
/// Decay rates below this are reported as an infinite dwell time.
inline constexpr double kClosedDecayFloor = 1e-10;

/// Schur factorisation of the open propagator, reordered by modulus.
ResonanceSet resonance_spectrum(const Eigen::MatrixXcd& open);

/// Convenience: U, Pi and the spectrum for one leak.
ResonanceSet resonances_for_leak(const QuantumParams& params, const Leak& leak);

/// Mean dwell time over all N states. Zero modes count as T = 0 unless
/// excluded; infinite dwell times (closed map) are always left out, and the
/// result is +inf if nothing finite remains.
double mean_dwell_time(const ResonanceSet& set, bool exclude_zero_modes = false);

/// The dwell times entering mean_dwell_time, in resonance order.
std::vector<double> finite_dwell_times(const ResonanceSet& set, bool exclude_zero_modes = false);

struct QuantumScanPoint {
  double center = 0.0;
  double mean_dwell = 0.0;
  double se_dwell = 0.0;
  std::size_t zero_modes = 0;
};

std::vector<QuantumScanPoint> leak_scan_quantum(const QuantumParams& params,
                                                std::span<const double> positions, double width,
                                                bool exclude_zero_modes = false);

}  // namespace leakmap
