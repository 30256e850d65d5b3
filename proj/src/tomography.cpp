#include "leakmap/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include <fftw3.h>

#include "leakmap/numeric.hpp"

namespace leakmap {

namespace {

constexpr double kPi = std::numbers::pi;
// Image terms with exp(-pi d^2 / N) below 1e-20 are dropped.
constexpr double kGaussianLogCutoff = 46.0517;

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

long floor_mod(long a, long m) {
  const long r = a % m;
  return r < 0 ? r + m : r;
}

}  // namespace

CoherentState coherent_state(PhaseSpacePoint center, int N, int image_cutoff) {
  if (N < 2) throw std::invalid_argument("coherent_state: N must be >= 2");
  CoherentState cs{center, N, Eigen::VectorXcd::Zero(N)};
  for (int k = 1; k <= N; ++k) {
    std::complex<double> amp = 0.0;
    for (int m = -image_cutoff; m <= image_cutoff; ++m) {
      const long j = k - static_cast<long>(m) * N;
      const double d = static_cast<double>(j) - center.q * N;
      const double g = std::exp(-kPi * d * d / N);
      amp += std::polar(g, 2.0 * kPi * center.p * static_cast<double>(j));
    }
    cs.amplitudes(k - 1) = amp;
  }
  cs.amplitudes.normalize();
  return cs;
}

struct HusimiEvaluator::Plan {
  fftw_plan plan = nullptr;
  ~Plan() {
    if (plan) {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(plan);
    }
  }
};

HusimiEvaluator::HusimiEvaluator(int N, HusimiResolution resolution, int image_cutoff)
    : N_(N), res_(resolution), plan_(std::make_unique<Plan>()) {
  if (N < 2) throw std::invalid_argument("HusimiEvaluator: N must be >= 2");
  if (res_.n_q < 2 || res_.n_p < 2)
    throw std::invalid_argument("HusimiEvaluator: resolution must be at least 2x2");
  image_lo_ = 1 - static_cast<long>(image_cutoff) * N;
  image_hi_ = N + static_cast<long>(image_cutoff) * N;
  const double half_window = std::sqrt(kGaussianLogCutoff * N / kPi);

  const std::size_t n_q = res_.n_q;
  const std::size_t n_p = res_.n_p;
  rows_.resize(n_q);
  inv_norm_.resize(n_q * n_p);

  // cos(2 pi p_l d N) for the norm's image-pair terms.
  const int max_shift = 2 * image_cutoff;
  std::vector<double> cos_table(n_p * static_cast<std::size_t>(max_shift + 1));
  for (std::size_t l = 0; l < n_p; ++l)
    for (int d = 0; d <= max_shift; ++d) {
      const long num = floor_mod(static_cast<long>(2 * l + 1) * d * N, 2 * static_cast<long>(n_p));
      cos_table[l * (max_shift + 1) + d] = std::cos(kPi * static_cast<double>(num) / n_p);
    }

  for (std::size_t i = 0; i < n_q; ++i) {
    const double c = (static_cast<double>(i) + 0.5) / static_cast<double>(n_q) * N;
    const long lo = std::max(image_lo_, static_cast<long>(std::ceil(c - half_window)));
    const long hi = std::min(image_hi_, static_cast<long>(std::floor(c + half_window)));
    Row& row = rows_[i];
    row.first_image = lo;
    for (long j = lo; j <= hi; ++j) {
      const double d = static_cast<double>(j) - c;
      row.gaussian.push_back(std::exp(-kPi * d * d / N));
    }
    // ||alpha||^2 = sum_d c_d cos(2 pi p d N), c_d = sum_j G(j) G(j + dN).
    std::vector<double> pair_sum(max_shift + 1, 0.0);
    const long len = static_cast<long>(row.gaussian.size());
    for (int d = 0; d <= max_shift; ++d) {
      std::vector<double> terms;
      for (long a = 0; a + static_cast<long>(d) * N < len; ++a)
        terms.push_back(row.gaussian[a] * row.gaussian[a + static_cast<long>(d) * N]);
      pair_sum[d] = compensated_sum(terms);
    }
    for (std::size_t l = 0; l < n_p; ++l) {
      double norm = pair_sum[0];
      for (int d = 1; d <= max_shift; ++d)
        norm += 2.0 * pair_sum[d] * cos_table[l * (max_shift + 1) + d];
      inv_norm_[i * n_p + l] = 1.0 / norm;
    }
  }

  std::lock_guard lock(planner_mutex());
  fftw_complex* scratch = fftw_alloc_complex(n_q * n_p);
  const int n = static_cast<int>(n_p);
  plan_->plan = fftw_plan_many_dft(1, &n, static_cast<int>(n_q), scratch, nullptr, 1, n, scratch,
                                   nullptr, 1, n, FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_free(scratch);
  if (!plan_->plan) throw std::runtime_error("HusimiEvaluator: FFT planning failed");
}

HusimiEvaluator::~HusimiEvaluator() = default;

HusimiField HusimiEvaluator::operator()(const Eigen::Ref<const Eigen::VectorXcd>& state) const {
  if (state.size() != N_)
    throw std::invalid_argument("husimi: state dimension does not match the evaluator");
  if (state.squaredNorm() == 0.0) throw std::invalid_argument("husimi: zero-norm state");

  const std::size_t n_q = res_.n_q;
  const std::size_t n_p = res_.n_p;
  const long np = static_cast<long>(n_p);
  std::unique_ptr<fftw_complex[], decltype(&fftw_free)> buf(fftw_alloc_complex(n_q * n_p),
                                                            &fftw_free);
  auto* data = reinterpret_cast<std::complex<double>*>(buf.get());
  std::fill(data, data + n_q * n_p, std::complex<double>(0.0, 0.0));

  // Fold sum_j G(j) e^{-2 pi i p_l j} v_{k(j)} onto l-periodic bins, with
  // p_l = (l + 1/2) / n_p split into a per-j phase and a length-n_p DFT.
  for (std::size_t i = 0; i < n_q; ++i) {
    const Row& row = rows_[i];
    std::complex<double>* out = data + i * n_p;
    for (std::size_t a = 0; a < row.gaussian.size(); ++a) {
      const long j = row.first_image + static_cast<long>(a);
      const double angle = -kPi * static_cast<double>(floor_mod(j, 2 * np)) / np;
      const std::complex<double> amp = state(floor_mod(j - 1, N_));
      out[floor_mod(j, np)] += std::polar(row.gaussian[a], angle) * amp;
    }
  }
  fftw_execute_dft(plan_->plan, buf.get(), buf.get());

  HusimiField field{n_q, n_p, std::vector<double>(n_q * n_p), 0.0};
  for (std::size_t c = 0; c < n_q * n_p; ++c) field.mass[c] = std::norm(data[c]) * inv_norm_[c];
  field.raw_total = compensated_sum(field.mass);
  if (!(field.raw_total > 0.0)) throw std::invalid_argument("husimi: vanishing distribution");
  for (double& m : field.mass) m /= field.raw_total;
  return field;
}

HusimiField husimi(const Eigen::VectorXcd& state, HusimiResolution resolution) {
  const HusimiEvaluator evaluator(static_cast<int>(state.size()), resolution);
  return evaluator(state);
}

HusimiField mean_husimi(const ResonanceSet& set, std::size_t count,
                        const HusimiEvaluator& evaluator) {
  if (count == 0) throw std::invalid_argument("mean_husimi: count must be >= 1");
  if (count > set.size()) throw std::invalid_argument("mean_husimi: count exceeds N");
  const auto alive = static_cast<std::size_t>(std::count_if(
      set.dwell_time.begin(), set.dwell_time.end(), [](double t) { return t > 0.0; }));
  if (alive < count)
    throw std::invalid_argument("mean_husimi: fewer states with non-zero dwell time than requested");

  HusimiField acc = evaluator(set.schur_vectors.col(0));
  for (std::size_t k = 1; k < count; ++k) {
    const HusimiField f = evaluator(set.schur_vectors.col(static_cast<Eigen::Index>(k)));
    for (std::size_t c = 0; c < acc.mass.size(); ++c) acc.mass[c] += f.mass[c];
  }
  if (count > 1) {
    const double total = compensated_sum(acc.mass);
    for (double& m : acc.mass) m /= total;
  }
  return acc;
}

double differential_entropy(const HusimiField& field) {
  const double cells = static_cast<double>(field.mass.size());
  std::vector<double> terms;
  terms.reserve(field.mass.size());
  for (double m : field.mass)
    if (m > 0.0) terms.push_back(-m * std::log(m * cells));
  return compensated_sum(terms);
}

WehrlScale::WehrlScale(const HusimiEvaluator& evaluator)
    : reference_(differential_entropy(
          evaluator(coherent_state({0.5, 0.5}, evaluator.dimension()).amplitudes))) {
  if (!(reference_ < 0.0))
    throw std::runtime_error("WehrlScale: reference coherent state is not localised on this grid");
}

double WehrlScale::normalize(double entropy) const noexcept {
  const double s = (entropy - reference_) / (0.0 - reference_);
  return std::clamp(s, 0.0, 1.0);
}

WehrlRecord wehrl_entropy(const HusimiField& field, const WehrlScale& scale) {
  if (std::none_of(field.mass.begin(), field.mass.end(), [](double m) { return m > 0.0; }))
    throw std::invalid_argument("wehrl_entropy: all-zero field");
  const double s = differential_entropy(field);
  return {scale.normalize(s), s, std::numeric_limits<double>::quiet_NaN()};
}

WehrlRecord wehrl_entropy(const HusimiField& field, int N) {
  const HusimiEvaluator evaluator(N, {field.n_q, field.n_p});
  return wehrl_entropy(field, WehrlScale(evaluator));
}

std::vector<WehrlRecord> wehrl_entropies(const ResonanceSet& set, const HusimiEvaluator& evaluator,
                                         const WehrlScale& scale) {
  std::vector<WehrlRecord> out(set.size());
  const auto n = static_cast<std::int64_t>(set.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t k = 0; k < n; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    WehrlRecord r = wehrl_entropy(evaluator(set.schur_vectors.col(k)), scale);
    r.dwell_time = set.dwell_time[idx];
    out[idx] = r;
  }
  return out;
}

EntropyDwellScatter bin_by_dwell(std::vector<WehrlRecord> points, double bin_width) {
  if (!(bin_width > 0.0)) throw std::invalid_argument("bin_by_dwell: bin width must be positive");
  EntropyDwellScatter out;
  out.points = std::move(points);
  out.bin_index.resize(out.points.size());
  std::map<long, std::vector<double>> members;
  for (std::size_t k = 0; k < out.points.size(); ++k) {
    const double t = out.points[k].dwell_time;
    if (!std::isfinite(t)) {
      out.bin_index[k] = -1;
      continue;
    }
    const long b = static_cast<long>(std::floor(t / bin_width));
    out.bin_index[k] = b;
    members[b].push_back(out.points[k].s_w);
  }
  for (const auto& [b, values] : members) {
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    out.bins.push_back({b, b * bin_width, (b + 1) * bin_width, mean(values), *lo, *hi,
                        values.size()});
  }
  return out;
}

EntropyDwellScatter entropy_vs_dwell(const ResonanceSet& set, double bin_width,
                                     const HusimiEvaluator& evaluator, const WehrlScale& scale) {
  return bin_by_dwell(wehrl_entropies(set, evaluator, scale), bin_width);
}

std::vector<EntropyScanPoint> leak_scan_entropy(const QuantumParams& params,
                                                std::span<const double> positions, double width,
                                                HusimiResolution resolution,
                                                bool exclude_zero_modes) {
  const Eigen::MatrixXcd u = build_unitary(params);
  const HusimiEvaluator evaluator(params.N, resolution);
  const WehrlScale scale(evaluator);
  std::vector<EntropyScanPoint> out;
  out.reserve(positions.size());
  for (double center : positions) {
    const ResonanceSet set =
        resonance_spectrum(open_propagator(u, build_projector(params, {center, width})));
    const std::vector<WehrlRecord> records = wehrl_entropies(set, evaluator, scale);
    std::vector<double> s_w;
    for (const WehrlRecord& r : records) {
      if (exclude_zero_modes && r.dwell_time == 0.0) continue;
      s_w.push_back(r.s_w);
    }
    EntropyScanPoint pt;
    pt.center = center;
    pt.mean_wehrl = mean(s_w);
    pt.se_wehrl = standard_error(s_w);
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
