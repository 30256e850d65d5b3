#include "leakmap/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "leakmap/error.hpp"

namespace leakmap::io {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

void put_u32(std::ostream& os, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                              static_cast<char>((v >> 16) & 0xff),
                              static_cast<char>((v >> 24) & 0xff)};
  os.write(b.data(), 4);
}

std::uint32_t get_u32(const unsigned char* b) {
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), end);
}

void write_csv(const std::filesystem::path& path, const CsvRow& header,
               const std::vector<CsvRow>& rows) {
  std::ofstream out = open_out(path);
  auto emit = [&out](const CsvRow& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      out << row[c];
    }
    out << '\n';
  };
  emit(header);
  for (const CsvRow& row : rows) emit(row);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void write_lcf(const std::filesystem::path& path, std::uint32_t rows, std::uint32_t cols,
               std::span<const double> values) {
  if (values.size() != static_cast<std::size_t>(rows) * cols)
    throw std::invalid_argument("write_lcf: value count does not match rows*cols");
  static_assert(std::numeric_limits<double>::is_iec559);
  std::ofstream out = open_out(path);
  out.write("LCF1", 4);
  put_u32(out, rows);
  put_u32(out, cols);
  put_u32(out, kLcfFloat64);
  for (double v : values) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_u32(out, static_cast<std::uint32_t>(bits & 0xffffffffu));
    put_u32(out, static_cast<std::uint32_t>(bits >> 32));
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

LcfMatrix read_lcf(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::array<unsigned char, 16> header{};
  in.read(reinterpret_cast<char*>(header.data()), header.size());
  if (!in || std::memcmp(header.data(), "LCF1", 4) != 0)
    throw IoError("'" + path.string() + "' is not an LCF1 file");
  LcfMatrix m{get_u32(header.data() + 4), get_u32(header.data() + 8), {}};
  if (get_u32(header.data() + 12) != kLcfFloat64)
    throw IoError("'" + path.string() + "' has an unsupported dtype");
  const std::size_t count = static_cast<std::size_t>(m.rows) * m.cols;
  std::vector<unsigned char> raw(count * 8);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!in) throw IoError("'" + path.string() + "' is truncated");
  m.values.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::uint64_t bits = static_cast<std::uint64_t>(get_u32(&raw[8 * k])) |
                               (static_cast<std::uint64_t>(get_u32(&raw[8 * k + 4])) << 32);
    std::memcpy(&m.values[k], &bits, sizeof bits);
  }
  return m;
}

void write_field_csv(const std::filesystem::path& path, const ScalarField& field) {
  std::ofstream out = open_out(path);
  out << "q,p,value,mask\n";
  const PhaseSpaceGrid& g = field.grid;
  for (std::size_t i = 0; i < g.n_q; ++i) {
    const std::string q = format_double(g.q_at(i));
    for (std::size_t j = 0; j < g.n_p; ++j) {
      const std::size_t c = g.index(i, j);
      out << q << ',' << format_double(g.p_at(j)) << ',' << format_double(field.values[c]) << ','
          << static_cast<int>(field.mask[c]) << '\n';
    }
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::filesystem::path write_pgm(const std::filesystem::path& path, std::size_t n_q,
                                std::size_t n_p, std::span<const double> values,
                                std::span<const std::uint8_t> mask) {
  if (values.size() != n_q * n_p) throw std::invalid_argument("write_pgm: size mismatch");
  auto valid = [&](std::size_t c) { return (mask.empty() || mask[c]) && std::isfinite(values[c]); };
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t c = 0; c < values.size(); ++c) {
    if (!valid(c)) continue;
    lo = std::min(lo, values[c]);
    hi = std::max(hi, values[c]);
  }
  const bool any = lo <= hi;
  std::vector<unsigned char> pixels(n_q * n_p, 255);
  for (std::size_t row = 0; row < n_p; ++row) {
    const std::size_t j = n_p - 1 - row;  // top row is the largest p
    for (std::size_t i = 0; i < n_q; ++i) {
      const std::size_t c = i * n_p + j;
      if (!valid(c)) continue;
      const double t = hi > lo ? (values[c] - lo) / (hi - lo) : 0.0;
      pixels[row * n_q + i] = static_cast<unsigned char>(std::lround(254.0 * t));
    }
  }
  {
    std::ofstream out = open_out(path);
    out << "P5\n" << n_q << ' ' << n_p << "\n255\n";
    out.write(reinterpret_cast<const char*>(pixels.data()),
              static_cast<std::streamsize>(pixels.size()));
    if (!out) throw IoError("write failed for '" + path.string() + "'");
  }
  nlohmann::json side;
  side["image"] = path.filename().string();
  side["width"] = n_q;
  side["height"] = n_p;
  side["min"] = any ? lo : 0.0;
  side["max"] = any ? hi : 0.0;
  side["gray_levels"] = 254;
  side["masked_value"] = 255;
  side["orientation"] = "columns: q ascending; rows: p descending";
  std::filesystem::path sidecar = path;
  sidecar.replace_extension(".json");
  std::ofstream out = open_out(sidecar);
  out << side.dump(2) << '\n';
  return sidecar;
}

}  // namespace leakmap::io
