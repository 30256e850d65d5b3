#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "leakmap/classical_ensemble.hpp"

namespace leakmap::io {

/// Shortest decimal form that parses back to the same double; "nan", "inf", "-inf".
std::string format_double(double value);

using CsvRow = std::vector<std::string>;

/// Writes a header line plus rows, comma separated, '\n' line endings.
void write_csv(const std::filesystem::path& path, const CsvRow& header,
               const std::vector<CsvRow>& rows);

/// LCF1 binary matrix: magic "LCF1", u32 rows, u32 cols, u32 dtype (1 = f64),
/// all little-endian, followed by rows*cols row-major doubles.
inline constexpr std::uint32_t kLcfFloat64 = 1;

struct LcfMatrix {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<double> values;
};

void write_lcf(const std::filesystem::path& path, std::uint32_t rows, std::uint32_t cols,
               std::span<const double> values);
LcfMatrix read_lcf(const std::filesystem::path& path);

/// Field as CSV with header q,p,value,mask (one row per cell).
void write_field_csv(const std::filesystem::path& path, const ScalarField& field);

/// 8-bit binary PGM with q along columns and p increasing upwards. Values are
/// scaled linearly from [min, max] over unmasked cells; masked cells are 255.
/// A sidecar JSON next to the image (same stem, .json) records the scale.
/// Returns the sidecar path.
std::filesystem::path write_pgm(const std::filesystem::path& path, std::size_t n_q,
                                std::size_t n_p, std::span<const double> values,
                                std::span<const std::uint8_t> mask = {});

}  // namespace leakmap::io
