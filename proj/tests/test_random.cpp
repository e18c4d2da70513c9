#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "gfra/random.hpp"

using gfra::RandomStream;

TEST_CASE("substream derivation is order independent and purpose separated") {
  RandomStream a = RandomStream::derive(42, "pilots", 7);
  RandomStream b = RandomStream::derive(42, "pilots", 7);
  CHECK(a.next_u64() == b.next_u64());
  CHECK(a.next_u64() == b.next_u64());

  RandomStream c = RandomStream::derive(42, "pilots", 8);
  RandomStream d = RandomStream::derive(42, "noise", 7);
  RandomStream e = RandomStream::derive(43, "pilots", 7);
  std::set<std::uint64_t> firsts;
  firsts.insert(RandomStream::derive(42, "pilots", 7).next_u64());
  firsts.insert(c.next_u64());
  firsts.insert(d.next_u64());
  firsts.insert(e.next_u64());
  CHECK(firsts.size() == 4);
}

TEST_CASE("uniform moments") {
  RandomStream s(123);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
    sum2 += u * u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(sum2 / n == doctest::Approx(1.0 / 3.0).epsilon(0.01));
}

TEST_CASE("complex normal has unit variance and circular symmetry") {
  RandomStream s(7);
  const int n = 200000;
  double p = 0.0;
  std::complex<double> mean = 0.0;
  std::complex<double> pseudo = 0.0;  // E[h^2] should vanish for CN(0,1)
  for (int i = 0; i < n; ++i) {
    const auto h = s.cnormal();
    p += std::norm(h);
    mean += h;
    pseudo += h * h;
  }
  CHECK(p / n == doctest::Approx(1.0).epsilon(0.01));
  CHECK(std::abs(mean) / n < 0.01);
  CHECK(std::abs(pseudo) / n < 0.01);
}

TEST_CASE("real normal moments") {
  RandomStream s(99);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = s.normal();
    sum += x;
    sum2 += x * x;
    sum4 += x * x * x * x;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(sum4 / n == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("uniform_int is unbiased over small ranges") {
  RandomStream s(5);
  const int bound = 7;
  int counts[7] = {0};
  const int n = 140000;
  for (int i = 0; i < n; ++i) ++counts[s.uniform_int(bound)];
  for (int k = 0; k < bound; ++k)
    CHECK(counts[k] == doctest::Approx(n / double(bound)).epsilon(0.03));
}
