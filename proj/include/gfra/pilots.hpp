// Sensing-matrix construction: dense Gaussian pilot books (plain and
// embedded-bit expanded) and sparse binary matrices for peeling decoders.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gfra/random.hpp"
#include "gfra/types.hpp"

namespace gfra {

enum class PilotKind { kDenseGaussian, kSparseBinary };

/// L x C sensing matrix with C = N * 2^J columns. Column layout is
/// device-major: column of (device n, message i) is n * 2^J + i, which is
/// total and invertible by construction.
struct PilotMatrix {
  CMat entries;  // L x C
  int n_devices = 0;
  int bits_per_device = 0;  // J
  PilotKind kind = PilotKind::kDenseGaussian;

  int messages_per_device() const { return 1 << bits_per_device; }
  int cols() const { return static_cast<int>(entries.cols()); }
  int rows() const { return static_cast<int>(entries.rows()); }
  int col_index(int device, int message = 0) const {
    return device * messages_per_device() + message;
  }
  int device_of(int col) const { return col / messages_per_device(); }
  int message_of(int col) const { return col % messages_per_device(); }
};

/// Explicit L x N binary support pattern, one support set per row.
struct SparseGraphSpec {
  int rows = 0;
  int cols = 0;
  std::vector<std::vector<int>> row_patterns;
};

/// Entries i.i.d. CN(0, 1/L); generated column by column so the layout is
/// stable under a fixed stream. normalize_columns rescales each column to
/// unit norm (off by default).
PilotMatrix generate_gaussian_pilots(int pilot_len, int n_devices, int bits_per_device,
                                     RandomStream& stream, bool normalize_columns = false);

/// Index of the pilot selected by bits (b_1, ..., b_J): 1 + sum 2^(i-1) b_i,
/// a bijection onto {1, ..., 2^J}.
int pilot_index(const std::vector<int>& bits);

/// Inverse of pilot_index.
std::vector<int> decode_bits(int index, int n_bits);

/// Binary matrix from an explicit spec. Throws ConfigError on out-of-range
/// or duplicate support indices.
PilotMatrix build_sparse_matrix(const SparseGraphSpec& spec);

/// Random column-regular binary matrix: every column carries exactly
/// `degree` ones in distinct rows.
PilotMatrix build_column_regular_matrix(int rows, int cols, int degree, RandomStream& stream);

/// Binary fixture cache: header (L, N, J, kind, seed), then row-major
/// complex64 (float re, float im) entries.
void save_pilot_cache(const std::string& path, const PilotMatrix& matrix, std::uint64_t seed);
PilotMatrix load_pilot_cache(const std::string& path, std::uint64_t* seed_out = nullptr);

}  // namespace gfra
