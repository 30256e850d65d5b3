#include "leakmap/standard_map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace leakmap {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kBoundaryTolerance = 1e-12;
}  // namespace

double wrap_unit(double x) noexcept {
  double r = x - std::floor(x);
  // x slightly below an integer can round up to exactly 1.
  return r >= 1.0 ? 0.0 : r;
}

PhaseSpacePoint reflect(PhaseSpacePoint x) noexcept {
  return {wrap_unit(1.0 - x.q), wrap_unit(1.0 - x.p)};
}

PhaseSpacePoint step(PhaseSpacePoint x, const MapParams& params) noexcept {
  const double q = wrap_unit(x.q + x.p);
  const double p = wrap_unit(x.p - params.K / kTwoPi * std::sin(kTwoPi * q));
  return {q, p};
}

Matrix2 one_step_jacobian(double q_next, const MapParams& params) noexcept {
  const double kc = params.K * std::cos(kTwoPi * q_next);
  return {{{1.0, 1.0}, {-kc, 1.0 - kc}}};
}

void TangentFrame::apply(const Matrix2& a) noexcept {
  // M = A Q
  const double m00 = a[0][0] * cos_ + a[0][1] * sin_;
  const double m01 = -a[0][0] * sin_ + a[0][1] * cos_;
  const double m10 = a[1][0] * cos_ + a[1][1] * sin_;
  const double m11 = -a[1][0] * sin_ + a[1][1] * cos_;

  // M = G^T R' with G a Givens rotation zeroing the (1,0) entry.
  const double rho = std::hypot(m00, m10);
  double c = 1.0;
  double s = 0.0;
  if (rho > 0.0) {
    c = m00 / rho;
    s = m10 / rho;
  }
  const double r11 = rho;
  const double r12 = c * m01 + s * m11;
  const double r22 = -s * m01 + c * m11;

  // R <- R' R, with the diagonal kept in log form.
  const double ratio = sign_r22_ * std::exp(log_r22_ - log_r11_);  // r22 / r11 before update
  shear_ += (r12 / r11) * ratio;
  log_r11_ += std::log(r11);
  log_r22_ += std::log(std::abs(r22));
  if (r22 < 0.0) sign_r22_ = -sign_r22_;

  cos_ = c;
  sin_ = s;
  ++steps_;
}

Matrix2 TangentFrame::matrix() const noexcept {
  const double r11 = std::exp(log_r11_);
  const double r12 = r11 * shear_;
  const double r22 = sign_r22_ * std::exp(log_r22_);
  return {{{cos_ * r11, cos_ * r12 - sin_ * r22}, {sin_ * r11, sin_ * r12 + cos_ * r22}}};
}

double TangentFrame::determinant() const noexcept {
  return sign_r22_ * std::exp(log_abs_determinant());
}

double TangentFrame::log_sigma_max() const noexcept {
  // sigma_max(R) = r11 * sigma_max([[1, shear], [0, rho]])
  const double rho = std::exp(log_r22_ - log_r11_);
  const double trace = 1.0 + shear_ * shear_ + rho * rho;
  const double disc = std::sqrt(std::max(0.0, trace * trace - 4.0 * rho * rho));
  return log_r11_ + 0.5 * std::log(0.5 * (trace + disc));
}

TangentFrame tangent_step(double q_next, TangentFrame frame, const MapParams& params) noexcept {
  frame.apply(one_step_jacobian(q_next, params));
  return frame;
}

double ftle(PhaseSpacePoint x0, std::uint64_t n, const MapParams& params) {
  if (n == 0) throw std::invalid_argument("ftle: iteration count must be >= 1");
  TangentFrame frame;
  PhaseSpacePoint x = x0;
  for (std::uint64_t t = 0; t < n; ++t) {
    x = step(x, params);
    frame.apply(one_step_jacobian(x.q, params));
  }
  return frame.log_sigma_max() / static_cast<double>(n);
}

void validate(const Leak& leak) {
  if (!std::isfinite(leak.center))
    throw std::invalid_argument("leak center must be finite");
  if (!(leak.width >= 0.0 && leak.width <= 1.0))
    throw std::invalid_argument("leak width must lie in [0, 1]");
}

bool in_periodic_interval(double q, double center, double width) noexcept {
  if (width <= 0.0) return false;
  if (width >= 1.0) return true;
  const double lo = center - 0.5 * width - kBoundaryTolerance;
  const double hi = center + 0.5 * width - kBoundaryTolerance;
  for (double shift : {0.0, 1.0, -1.0, 2.0, -2.0}) {
    const double x = q + shift;
    if (x >= lo && x < hi) return true;
  }
  return false;
}

bool in_leak(PhaseSpacePoint x, const Leak& leak) noexcept {
  return in_periodic_interval(x.q, leak.center, leak.width);
}

EscapeRecord evolve_open(PhaseSpacePoint x0, const Leak& leak, std::uint64_t t_max,
                         const MapParams& params) {
  if (t_max == 0) throw std::invalid_argument("evolve_open: t_max must be >= 1");
  if (in_leak(x0, leak)) {
    return {0, std::numeric_limits<double>::quiet_NaN(), true, true};
  }
  TangentFrame frame;
  PhaseSpacePoint x = x0;
  for (std::uint64_t t = 1; t <= t_max; ++t) {
    x = step(x, params);
    frame.apply(one_step_jacobian(x.q, params));
    if (in_leak(x, leak)) {
      return {t, frame.log_sigma_max() / static_cast<double>(t), true, false};
    }
  }
  return {t_max, frame.log_sigma_max() / static_cast<double>(t_max), false, false};
}

}  // namespace leakmap
