#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "gfra/pilots.hpp"

using namespace gfra;

TEST_CASE("gaussian pilot book statistics") {
  RandomStream s(21);
  const int l = 32;
  PilotMatrix p = generate_gaussian_pilots(l, 10000, 0, s);
  CHECK(p.cols() == 10000);

  // Column energy: L entries of variance 1/L each.
  double energy = 0.0;
  for (int c = 0; c < p.cols(); ++c) energy += p.entries.col(c).squaredNorm();
  CHECK(energy / p.cols() == doctest::Approx(1.0).epsilon(0.02));

  // Entry mean ~ 0 and variance ~ 1/L at 3 standard errors.
  const auto n_entries = static_cast<double>(p.entries.size());
  CHECK(std::abs(p.entries.sum()) / n_entries < 3.0 / std::sqrt(n_entries * l));
  CHECK(p.entries.squaredNorm() / n_entries ==
        doctest::Approx(1.0 / l).epsilon(3.0 * std::sqrt(2.0 / n_entries)));

  // Cross-correlation of distinct columns concentrates near zero.
  Complex cross = 0.0;
  const int pairs = 5000;
  for (int i = 0; i < pairs; ++i) cross += p.entries.col(2 * i).dot(p.entries.col(2 * i + 1));
  CHECK(std::abs(cross) / pairs < 3.0 / std::sqrt(static_cast<double>(pairs) * l));
}

TEST_CASE("embedded book has N * 2^J distinct columns") {
  RandomStream s(22);
  PilotMatrix p = generate_gaussian_pilots(8, 5, 2, s);
  CHECK(p.cols() == 20);
  CHECK(p.messages_per_device() == 4);
  // Layout is total and invertible.
  for (int n = 0; n < 5; ++n)
    for (int i = 0; i < 4; ++i) {
      const int col = p.col_index(n, i);
      CHECK(p.device_of(col) == n);
      CHECK(p.message_of(col) == i);
      for (int j = 0; j < i; ++j)
        CHECK((p.entries.col(col) - p.entries.col(p.col_index(n, j))).norm() > 0.0);
    }

  RandomStream s2(23);
  PilotMatrix q = generate_gaussian_pilots(8, 5, 0, s2);
  CHECK(q.cols() == 5);  // J = 0: exactly N columns
}

TEST_CASE("normalize_columns flag yields unit columns") {
  RandomStream s(24);
  PilotMatrix p = generate_gaussian_pilots(16, 50, 0, s, true);
  for (int c = 0; c < p.cols(); ++c)
    CHECK(p.entries.col(c).norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pilot_index follows the bit formula") {
  CHECK(pilot_index({1, 0, 1}) == 6);  // 1 + 1 + 0 + 4
  CHECK(pilot_index({0}) == 1);
  CHECK(pilot_index({1}) == 2);
  CHECK(pilot_index({}) == 1);
  CHECK_THROWS_AS(pilot_index({2}), ConfigError);
}

TEST_CASE("pilot_index / decode_bits round trip up to J = 10") {
  for (int j = 1; j <= 10; ++j) {
    for (int idx = 1; idx <= (1 << j); ++idx) {
      const std::vector<int> bits = decode_bits(idx, j);
      CHECK(pilot_index(bits) == idx);
    }
  }
  CHECK_THROWS_AS(decode_bits(0, 3), ConfigError);
  CHECK_THROWS_AS(decode_bits(9, 3), ConfigError);
}

TEST_CASE("explicit sparse matrix construction") {
  SparseGraphSpec spec;
  spec.rows = 3;
  spec.cols = 7;
  spec.row_patterns = {{0, 3, 6}, {0, 2, 4}, {1, 2, 5}};
  PilotMatrix p = build_sparse_matrix(spec);
  Eigen::MatrixXd expected(3, 7);
  expected << 1, 0, 0, 1, 0, 0, 1,  //
      1, 0, 1, 0, 1, 0, 0,          //
      0, 1, 1, 0, 0, 1, 0;
  CHECK(p.entries.real() == expected);
  CHECK(p.entries.imag().norm() == 0.0);

  SparseGraphSpec empty = spec;
  empty.row_patterns = {{}, {}, {}};
  CHECK(build_sparse_matrix(empty).entries.norm() == 0.0);

  SparseGraphSpec bad = spec;
  bad.row_patterns[0] = {0, 7};
  CHECK_THROWS_AS(build_sparse_matrix(bad), ConfigError);
  bad.row_patterns[0] = {3, 3};
  CHECK_THROWS_AS(build_sparse_matrix(bad), ConfigError);
}

TEST_CASE("random column-regular construction has exact column degrees") {
  RandomStream s(25);
  PilotMatrix p = build_column_regular_matrix(50, 100, 2, s);
  for (int c = 0; c < 100; ++c) {
    int ones = 0;
    for (int r = 0; r < 50; ++r)
      if (p.entries(r, c) != Complex(0.0, 0.0)) ++ones;
    CHECK(ones == 2);
  }
}

TEST_CASE("pilot cache round trip") {
  RandomStream s(26);
  PilotMatrix p = generate_gaussian_pilots(8, 6, 1, s);
  const std::string path =
      (std::filesystem::temp_directory_path() / "gfra_pilot_cache_test.bin").string();
  save_pilot_cache(path, p, 26);

  std::uint64_t seed = 0;
  PilotMatrix q = load_pilot_cache(path, &seed);
  CHECK(seed == 26);
  CHECK(q.rows() == p.rows());
  CHECK(q.cols() == p.cols());
  CHECK(q.bits_per_device == 1);
  // Entries survive the float32 round trip.
  CHECK((q.entries - p.entries).cwiseAbs().maxCoeff() < 1e-6);
  std::remove(path.c_str());

  CHECK_THROWS_AS(load_pilot_cache("/nonexistent/path.bin"), ConfigError);
}
