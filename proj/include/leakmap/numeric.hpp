#pragma once

#include <cstddef>
#include <span>

namespace leakmap {

/// Neumaier-compensated sum. The result does not depend on how the input was
/// produced, only on its order, which keeps parallel reductions reproducible.
double compensated_sum(std::span<const double> values) noexcept;

double mean(std::span<const double> values) noexcept;

/// Sample standard error of the mean; 0 for fewer than two values.
double standard_error(std::span<const double> values) noexcept;

/// Pearson correlation coefficient; NaN if either input has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

/// Applies the LEAKMAP_THREADS environment override, if set, to OpenMP.
void configure_threads_from_environment();

}  // namespace leakmap
