#include "gfra/pilots.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

namespace gfra {

PilotMatrix generate_gaussian_pilots(int pilot_len, int n_devices, int bits_per_device,
                                     RandomStream& stream, bool normalize_columns) {
  if (pilot_len < 1 || n_devices < 1 || bits_per_device < 0)
    throw ConfigError("pilot dimensions must satisfy L >= 1, N >= 1, J >= 0");
  PilotMatrix p;
  p.n_devices = n_devices;
  p.bits_per_device = bits_per_device;
  p.kind = PilotKind::kDenseGaussian;
  const int cols = n_devices * (1 << bits_per_device);
  const double scale = 1.0 / std::sqrt(static_cast<double>(pilot_len));
  p.entries.resize(pilot_len, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < pilot_len; ++r) p.entries(r, c) = scale * stream.cnormal();
  if (normalize_columns)
    for (int c = 0; c < cols; ++c) p.entries.col(c) /= p.entries.col(c).norm();
  return p;
}

int pilot_index(const std::vector<int>& bits) {
  int index = 1;
  for (size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != 0 && bits[i] != 1) throw ConfigError("bits must be 0 or 1");
    index += bits[i] << i;
  }
  return index;
}

std::vector<int> decode_bits(int index, int n_bits) {
  if (index < 1 || index > (1 << n_bits)) throw ConfigError("pilot index out of range");
  std::vector<int> bits(static_cast<size_t>(n_bits));
  const int v = index - 1;
  for (int i = 0; i < n_bits; ++i) bits[static_cast<size_t>(i)] = (v >> i) & 1;
  return bits;
}

PilotMatrix build_sparse_matrix(const SparseGraphSpec& spec) {
  if (spec.rows < 1 || spec.cols < 1) throw ConfigError("sparse spec dimensions must be >= 1");
  if (spec.row_patterns.size() != static_cast<size_t>(spec.rows))
    throw ConfigError("row_patterns must have exactly `rows` entries");
  PilotMatrix p;
  p.n_devices = spec.cols;
  p.bits_per_device = 0;
  p.kind = PilotKind::kSparseBinary;
  p.entries = CMat::Zero(spec.rows, spec.cols);
  for (int r = 0; r < spec.rows; ++r) {
    std::set<int> seen;
    for (int c : spec.row_patterns[static_cast<size_t>(r)]) {
      if (c < 0 || c >= spec.cols)
        throw ConfigError("row " + std::to_string(r) + " support index " + std::to_string(c) +
                          " out of range");
      if (!seen.insert(c).second)
        throw ConfigError("row " + std::to_string(r) + " has duplicate support index " +
                          std::to_string(c));
      p.entries(r, c) = Complex(1.0, 0.0);
    }
  }
  return p;
}

PilotMatrix build_column_regular_matrix(int rows, int cols, int degree, RandomStream& stream) {
  if (degree < 1 || degree > rows) throw ConfigError("column degree must lie in [1, rows]");
  PilotMatrix p;
  p.n_devices = cols;
  p.bits_per_device = 0;
  p.kind = PilotKind::kSparseBinary;
  p.entries = CMat::Zero(rows, cols);
  for (int c = 0; c < cols; ++c) {
    std::set<int> chosen;
    while (static_cast<int>(chosen.size()) < degree)
      chosen.insert(static_cast<int>(stream.uniform_int(static_cast<std::uint64_t>(rows))));
    for (int r : chosen) p.entries(r, c) = Complex(1.0, 0.0);
  }
  return p;
}

namespace {
constexpr char kCacheMagic[4] = {'G', 'F', 'P', 'M'};
constexpr std::uint32_t kCacheVersion = 1;
}  // namespace

void save_pilot_cache(const std::string& path, const PilotMatrix& matrix, std::uint64_t seed) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open pilot cache for writing: " + path);
  f.write(kCacheMagic, 4);
  const std::uint32_t version = kCacheVersion;
  const std::uint64_t rows = static_cast<std::uint64_t>(matrix.rows());
  const std::uint64_t devices = static_cast<std::uint64_t>(matrix.n_devices);
  const std::uint32_t bits = static_cast<std::uint32_t>(matrix.bits_per_device);
  const std::uint32_t kind = matrix.kind == PilotKind::kDenseGaussian ? 0 : 1;
  f.write(reinterpret_cast<const char*>(&version), sizeof version);
  f.write(reinterpret_cast<const char*>(&rows), sizeof rows);
  f.write(reinterpret_cast<const char*>(&devices), sizeof devices);
  f.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  f.write(reinterpret_cast<const char*>(&kind), sizeof kind);
  f.write(reinterpret_cast<const char*>(&seed), sizeof seed);
  for (int r = 0; r < matrix.rows(); ++r)
    for (int c = 0; c < matrix.cols(); ++c) {
      const float re = static_cast<float>(matrix.entries(r, c).real());
      const float im = static_cast<float>(matrix.entries(r, c).imag());
      f.write(reinterpret_cast<const char*>(&re), sizeof re);
      f.write(reinterpret_cast<const char*>(&im), sizeof im);
    }
  if (!f) throw ConfigError("short write to pilot cache: " + path);
}

PilotMatrix load_pilot_cache(const std::string& path, std::uint64_t* seed_out) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open pilot cache: " + path);
  char magic[4];
  std::uint32_t version = 0, bits = 0, kind = 0;
  std::uint64_t rows = 0, devices = 0, seed = 0;
  f.read(magic, 4);
  f.read(reinterpret_cast<char*>(&version), sizeof version);
  f.read(reinterpret_cast<char*>(&rows), sizeof rows);
  f.read(reinterpret_cast<char*>(&devices), sizeof devices);
  f.read(reinterpret_cast<char*>(&bits), sizeof bits);
  f.read(reinterpret_cast<char*>(&kind), sizeof kind);
  f.read(reinterpret_cast<char*>(&seed), sizeof seed);
  if (!f || std::memcmp(magic, kCacheMagic, 4) != 0 || version != kCacheVersion)
    throw ConfigError("not a pilot cache file: " + path);
  PilotMatrix p;
  p.n_devices = static_cast<int>(devices);
  p.bits_per_device = static_cast<int>(bits);
  p.kind = kind == 0 ? PilotKind::kDenseGaussian : PilotKind::kSparseBinary;
  const int cols = static_cast<int>(devices) * (1 << bits);
  p.entries.resize(static_cast<Eigen::Index>(rows), cols);
  for (Eigen::Index r = 0; r < p.entries.rows(); ++r)
    for (Eigen::Index c = 0; c < p.entries.cols(); ++c) {
      float re = 0.f, im = 0.f;
      f.read(reinterpret_cast<char*>(&re), sizeof re);
      f.read(reinterpret_cast<char*>(&im), sizeof im);
      p.entries(r, c) = Complex(re, im);
    }
  if (!f) throw ConfigError("truncated pilot cache: " + path);
  if (seed_out) *seed_out = seed;
  return p;
}

}  // namespace gfra
