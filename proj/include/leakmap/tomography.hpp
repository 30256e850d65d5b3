#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "leakmap/quantum.hpp"
#include "leakmap/standard_map.hpp"

namespace leakmap {

/// Periodised Gaussian on the N-point torus lattice, normalised to 1.
struct CoherentState {
  PhaseSpacePoint center;
  int N = 0;
  Eigen::VectorXcd amplitudes;  // position basis, index k - 1
};

/// Amplitude at q = k/N proportional to
///   sum_{m=-m_c..m_c} exp[-pi N (k/N - q0 - m)^2 + 2 pi i N p0 (k/N - m)].
CoherentState coherent_state(PhaseSpacePoint center, int N, int image_cutoff = 3);

struct HusimiResolution {
  std::size_t n_q = 1000;
  std::size_t n_p = 1000;

  std::size_t cells() const noexcept { return n_q * n_p; }
};

/// Cell masses of |<alpha(q,p)|v>|^2 on the cell-centred grid, summing to 1.
struct HusimiField {
  std::size_t n_q = 0;
  std::size_t n_p = 0;
  std::vector<double> mass;  // row-major, q index outermost
  double raw_total = 0.0;    // sum of |<alpha|v>|^2 before normalisation

  std::size_t index(std::size_t i, std::size_t j) const noexcept { return i * n_p + j; }
};

/// Evaluates Husimi distributions of N-dimensional states on a fixed grid.
///
/// For a grid row at fixed q the overlaps with the coherent states at every p
/// form a discrete Fourier sum over the lattice images j = k - mN, so a row
/// costs one length-n_p FFT instead of n_p dense inner products. Coherent
/// states are normalised exactly, using the same image truncation as
/// coherent_state().
class HusimiEvaluator {
 public:
  HusimiEvaluator(int N, HusimiResolution resolution, int image_cutoff = 3);
  ~HusimiEvaluator();
  HusimiEvaluator(const HusimiEvaluator&) = delete;
  HusimiEvaluator& operator=(const HusimiEvaluator&) = delete;

  int dimension() const noexcept { return N_; }
  HusimiResolution resolution() const noexcept { return res_; }

  /// Throws std::invalid_argument for a wrong-sized or zero-norm state.
  HusimiField operator()(const Eigen::Ref<const Eigen::VectorXcd>& state) const;

 private:
  struct Row {
    long first_image = 0;          // smallest image index j kept for this row
    std::vector<double> gaussian;  // G(j) for j = first_image, first_image + 1, ...
  };

  long image_lo_ = 0;
  long image_hi_ = 0;
  int N_;
  HusimiResolution res_;
  std::vector<Row> rows_;
  std::vector<double> inv_norm_;  // 1 / ||alpha(q_i, p_l)||^2
  struct Plan;
  std::unique_ptr<Plan> plan_;
};

/// One-shot Husimi evaluation. Prefer HusimiEvaluator for repeated use.
HusimiField husimi(const Eigen::VectorXcd& state, HusimiResolution resolution);

/// Average of the Husimi fields of the `count` longest-lived Schur vectors,
/// renormalised. Throws std::invalid_argument if fewer than `count` states
/// have a non-zero dwell time.
HusimiField mean_husimi(const ResonanceSet& set, std::size_t count,
                        const HusimiEvaluator& evaluator);

/// -sum Q ln Q dA with Q = cell mass / cell area and 0 ln 0 = 0. Zero for
/// the uniform density, negative otherwise.
double differential_entropy(const HusimiField& field);

/// Affine map of the differential entropy onto [0, 1], anchored at a
/// reference coherent state (0) and the uniform density (1) on the same grid.
class WehrlScale {
 public:
  explicit WehrlScale(const HusimiEvaluator& evaluator);
  double reference_entropy() const noexcept { return reference_; }
  double normalize(double entropy) const noexcept;

 private:
  double reference_;
};

struct WehrlRecord {
  double s_w = 0.0;
  double entropy = 0.0;  // raw differential entropy
  double dwell_time = 0.0;
};

/// Throws std::invalid_argument for an all-zero field.
WehrlRecord wehrl_entropy(const HusimiField& field, const WehrlScale& scale);

/// Builds the evaluator and reference for the field's resolution on the fly.
WehrlRecord wehrl_entropy(const HusimiField& field, int N);

/// S_W of every Schur vector, in resonance order.
std::vector<WehrlRecord> wehrl_entropies(const ResonanceSet& set, const HusimiEvaluator& evaluator,
                                         const WehrlScale& scale);

struct EntropyBin {
  long index = 0;
  double lo = 0.0;
  double hi = 0.0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

struct EntropyDwellScatter {
  std::vector<WehrlRecord> points;
  std::vector<long> bin_index;  // -1 for infinite dwell time
  std::vector<EntropyBin> bins;
};

/// Groups (T_k, S_W) pairs into dwell-time bins [b dT, (b+1) dT).
EntropyDwellScatter bin_by_dwell(std::vector<WehrlRecord> points, double bin_width);

EntropyDwellScatter entropy_vs_dwell(const ResonanceSet& set, double bin_width,
                                     const HusimiEvaluator& evaluator, const WehrlScale& scale);

struct EntropyScanPoint {
  double center = 0.0;
  double mean_wehrl = 0.0;
  double se_wehrl = 0.0;
  double mean_dwell = 0.0;
  double se_dwell = 0.0;
  std::size_t zero_modes = 0;
};

/// Mean S_W over all N Schur vectors for each leak position. Also reports
/// the mean dwell time of the same spectrum.
std::vector<EntropyScanPoint> leak_scan_entropy(const QuantumParams& params,
                                                std::span<const double> positions, double width,
                                                HusimiResolution resolution,
                                                bool exclude_zero_modes = false);

}  // namespace leakmap
