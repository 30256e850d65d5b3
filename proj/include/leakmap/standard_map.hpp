#pragma once

#include <array>
#include <cstdint>

namespace leakmap {

struct MapParams {
  double K = 10.0;  // stochastic parameter
};

/// A point on the unit torus; both coordinates live in [0, 1).
struct PhaseSpacePoint {
  double q = 0.0;
  double p = 0.0;
};

/// Floor-based reduction into [0, 1), also for negative arguments.
double wrap_unit(double x) noexcept;

/// Point reflection R(q, p) = (1 - q, 1 - p) mod 1, a symmetry of the map.
PhaseSpacePoint reflect(PhaseSpacePoint x) noexcept;

/// One iteration of the standard map. The position is updated first and the
/// kick is evaluated at the new position.
PhaseSpacePoint step(PhaseSpacePoint x, const MapParams& params) noexcept;

using Matrix2 = std::array<std::array<double, 2>, 2>;

/// Jacobian of one map iteration, [[1, 1], [-Kc, 1 - Kc]] with c = cos(2 pi q_next).
Matrix2 one_step_jacobian(double q_next, const MapParams& params) noexcept;

/// Accumulated product of one-step Jacobians, J_n = A_n ... A_1.
///
/// The product is held as J = Q R with Q a rotation and R upper triangular,
/// where the diagonal of R is stored as logarithms. This keeps long products
/// representable (n up to 1e6 and beyond) without periodic rescaling.
class TangentFrame {
 public:
  TangentFrame() = default;

  /// Left-multiplies the frame by `jacobian`.
  void apply(const Matrix2& jacobian) noexcept;

  /// Reconstructed J. Overflows once ln sigma_max exceeds ~700.
  Matrix2 matrix() const noexcept;

  double log_abs_determinant() const noexcept { return log_r11_ + log_r22_; }
  double determinant() const noexcept;
  double log_sigma_max() const noexcept;
  std::uint64_t steps() const noexcept { return steps_; }

 private:
  double cos_ = 1.0;  // Q = [[cos, -sin], [sin, cos]]
  double sin_ = 0.0;
  double log_r11_ = 0.0;
  double log_r22_ = 0.0;
  double sign_r22_ = 1.0;
  double shear_ = 0.0;  // r12 / r11
  std::uint64_t steps_ = 0;
};

/// Advances `frame` by the Jacobian evaluated at the already-updated position.
TangentFrame tangent_step(double q_next, TangentFrame frame, const MapParams& params) noexcept;

/// Finite-time Lyapunov exponent (1/n) ln sigma_max(J_n). Throws
/// std::invalid_argument for n == 0.
double ftle(PhaseSpacePoint x0, std::uint64_t n, const MapParams& params);

/// Strip parallel to the p axis: the half-open interval
/// [center - width/2, center + width/2) taken mod 1, all momenta.
struct Leak {
  double center = 0.5;
  double width = 0.2;
};

/// Throws std::invalid_argument unless 0 <= width <= 1 and center is finite.
void validate(const Leak& leak);

/// Half-open periodic interval test shared by leaks, strips and projectors.
/// Coordinates within 1e-12 of an endpoint are treated as lying on it, so
/// decimal inputs such as q = 0.3 against [0.1, 0.3) classify as intended.
bool in_periodic_interval(double q, double center, double width) noexcept;

bool in_leak(PhaseSpacePoint x, const Leak& leak) noexcept;

struct EscapeRecord {
  std::uint64_t tau = 0;  // dwell time in iterations
  double lambda = 0.0;    // FTLE over tau steps; NaN when tau == 0
  bool escaped = false;   // false if t_max was reached
  bool started_in_leak = false;
};

/// Iterates the open map until the orbit lands in the leak or t_max is hit.
/// Membership is tested after every full iteration. Throws
/// std::invalid_argument for t_max == 0.
EscapeRecord evolve_open(PhaseSpacePoint x0, const Leak& leak, std::uint64_t t_max,
                         const MapParams& params);

}  // namespace leakmap
