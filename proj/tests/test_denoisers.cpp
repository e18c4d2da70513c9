#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "gfra/denoisers.hpp"
#include "gfra/random.hpp"

using namespace gfra;

namespace {

// Quadrature oracle for the Bernoulli-Gaussian posterior mean at M = 1:
// trapezoid integration of E[X | X + tau U = v] over the complex plane,
// independent of the closed form under test.
Complex mmse_posterior_mean_quadrature(Complex v, double tau2, double eps, double beta) {
  const double radius = 6.0 * (std::sqrt(beta) + std::sqrt(tau2)) + std::abs(v);
  const int steps = 481;
  const double h = 2.0 * radius / (steps - 1);
  Complex weighted = 0.0;
  double mass = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double re = -radius + i * h;
    for (int j = 0; j < steps; ++j) {
      const double im = -radius + j * h;
      const Complex x(re, im);
      const double w = std::exp(-std::norm(v - x) / tau2 - std::norm(x) / beta);
      weighted += x * w;
      mass += w;
    }
  }
  const double cell = h * h / (M_PI * beta);
  const double active_mass = eps * cell * mass;
  const double silent_mass = (1.0 - eps) * std::exp(-std::norm(v) / tau2);
  return eps * cell * weighted / (active_mass + silent_mass);
}

// Wirtinger d(eta)/dv via central differences on the real and imaginary
// parts of each input coordinate.
CMat wirtinger_fd(const std::function<CVec(const CVec&)>& fn, const CVec& v, double h) {
  const auto m = v.size();
  CMat jac(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    CVec vp = v, vm = v;
    vp[j] += h;
    vm[j] -= h;
    const CVec dx = (fn(vp) - fn(vm)) / (2.0 * h);
    vp = v;
    vm = v;
    vp[j] += Complex(0.0, h);
    vm[j] -= Complex(0.0, h);
    const CVec dy = (fn(vp) - fn(vm)) / (2.0 * h);
    jac.col(j) = 0.5 * (dx - Complex(0.0, 1.0) * dy);
  }
  return jac;
}

CVec cvec1(Complex z) {
  CVec v(1);
  v[0] = z;
  return v;
}

}  // namespace

TEST_CASE("soft threshold: scalar cases") {
  CHECK(soft_threshold(cvec1(2.0), 1.0)[0] == Complex(1.0, 0.0));
  CHECK(soft_threshold(cvec1(Complex(0.3, -0.4)), 0.5).norm() == 0.0);
  CHECK(soft_threshold(cvec1(0.0), 0.7).norm() == 0.0);
}

TEST_CASE("soft threshold: radial shrinkage in M = 2") {
  CVec v(2);
  v << Complex(3.0, 0.0), Complex(0.0, 4.0);  // norm 5
  const CVec out = soft_threshold(v, 1.0);
  CHECK(out.norm() == doctest::Approx(4.0).epsilon(1e-12));
  // Same direction: out is a positive multiple of v.
  CHECK((out - 0.8 * v).norm() < 1e-12);
}

TEST_CASE("soft threshold norm identity ||eta(v)|| = max(||v|| - theta, 0)") {
  RandomStream s(31);
  for (int it = 0; it < 200; ++it) {
    const int m = 1 + static_cast<int>(s.uniform_int(4));
    CVec v(m);
    for (int i = 0; i < m; ++i) v[i] = 2.0 * s.cnormal();
    const double theta = 0.1 + 2.0 * s.uniform();
    const double expected = std::max(v.norm() - theta, 0.0);
    CHECK(soft_threshold(v, theta).norm() == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("mmse denoiser collapses to the Wiener gain at eps = 1") {
  CVec v(3);
  v << Complex(1.0, 2.0), Complex(-0.5, 0.25), Complex(0.0, -1.0);
  const double beta = 2.0, tau2 = 0.5;
  const CVec out = mmse_denoise(v, tau2, 1.0, beta);
  CHECK((out - (beta / (beta + tau2)) * v).norm() == 0.0);
}

TEST_CASE("mmse denoiser vanishes at eps = 0") {
  CHECK(mmse_denoise(cvec1(5.0), 0.1, 0.0, 1.0).norm() == 0.0);
}

TEST_CASE("mmse denoiser matches the quadrature oracle at M = 1") {
  const double eps = 0.05, beta = 1.0, tau2 = 0.1;
  int checked = 0;
  for (int k = 0; k < 25; ++k) {
    const double mag = 0.16 * (k + 1);  // 0.16 .. 4.0
    for (int p = 0; p < 4; ++p) {
      const double phase = 0.5 * M_PI * p + 0.3;
      const Complex v = std::polar(mag, phase);
      const Complex oracle = mmse_posterior_mean_quadrature(v, tau2, eps, beta);
      const Complex closed = mmse_denoise(cvec1(v), tau2, eps, beta)[0];
      CHECK(std::abs(oracle - closed) <= 1e-6);
      ++checked;
    }
  }
  CHECK(checked == 100);
}

TEST_CASE("mmse denoiser is a collinear contraction toward zero") {
  RandomStream s(32);
  for (int it = 0; it < 200; ++it) {
    const int m = 1 + static_cast<int>(s.uniform_int(4));
    CVec v(m);
    for (int i = 0; i < m; ++i) v[i] = 3.0 * s.cnormal();
    const double eps = s.uniform();
    const double beta = 0.2 + 2.0 * s.uniform();
    const double tau2 = 0.05 + s.uniform();
    const CVec out = mmse_denoise(v, tau2, eps, beta);
    CHECK(out.norm() <= v.norm() * beta / (beta + tau2) + 1e-12);
    // Collinear with v.
    if (v.norm() > 0 && out.norm() > 0) {
      const Complex ratio = out[0] / v[0];
      CHECK((out - ratio * v).norm() < 1e-10 * out.norm());
      CHECK(ratio.imag() == doctest::Approx(0.0).epsilon(1e-12));
      CHECK(ratio.real() >= 0.0);
    }
  }
}

TEST_CASE("posterior activity probability is increasing in ||v||") {
  double prev = -1.0;
  for (int k = 0; k < 50; ++k) {
    const double phi = posterior_activity(cvec1(Complex(0.1 * k, 0.0)), 0.1, 0.05, 1.0);
    CHECK(phi > 0.0);
    CHECK(phi < 1.0);
    CHECK(phi >= prev);
    prev = phi;
  }
}

TEST_CASE("jacobians: structural cases") {
  CVec v(2);
  v << Complex(0.1, 0.0), Complex(0.0, 0.2);
  CHECK(soft_threshold_jacobian(v, 1.0).norm() == 0.0);  // below threshold

  // Kink convention: at ||v|| == theta exactly, the zero-side derivative.
  CVec kink(2);
  kink << Complex(0.5, 0.0), Complex(0.0, 0.0);
  CHECK(soft_threshold_jacobian(kink, 0.5).norm() == 0.0);
  CHECK(soft_threshold(kink, 0.5).norm() == 0.0);

  const double beta = 1.5, tau2 = 0.3;
  CVec w(3);
  w << Complex(1.0, -1.0), Complex(0.5, 0.5), Complex(-2.0, 0.0);
  const CMat jac = mmse_jacobian(w, tau2, 1.0, beta);
  CHECK((jac - (beta / (beta + tau2)) * CMat::Identity(3, 3)).norm() == 0.0);
}

TEST_CASE("jacobians match Wirtinger finite differences") {
  RandomStream s(33);
  const double h = 1e-6;
  for (int m : {1, 4}) {
    for (int it = 0; it < 40; ++it) {
      CVec v(m);
      for (int i = 0; i < m; ++i) v[i] = 1.5 * s.cnormal();
      const double theta = 0.4;
      if (std::abs(v.norm() - theta) < 0.05) continue;  // keep away from the kink

      const CMat j_soft = soft_threshold_jacobian(v, theta);
      const CMat fd_soft =
          wirtinger_fd([&](const CVec& u) { return soft_threshold(u, theta); }, v, h);
      const double ref_soft = std::max(1.0, fd_soft.norm());
      CHECK((j_soft - fd_soft).norm() / ref_soft < 1e-5);

      const double eps = 0.2, beta = 1.0, tau2 = 0.25;
      const CMat j_mmse = mmse_jacobian(v, tau2, eps, beta);
      const CMat fd_mmse = wirtinger_fd(
          [&](const CVec& u) { return mmse_denoise(u, tau2, eps, beta); }, v, h);
      CHECK((j_mmse - fd_mmse).norm() / std::max(1.0, fd_mmse.norm()) < 1e-5);
    }
  }
}

TEST_CASE("mmse gain stays finite in the far tail (log-domain posterior)") {
  const double tau2 = 0.1;
  const CVec v = cvec1(Complex(1e3, 0.0));  // ||v||^2 = 1e6 tau2 / tau2 scale
  const CVec out = mmse_denoise(v, tau2, 0.05, 1.0);
  CHECK(std::isfinite(out[0].real()));
  CHECK(out.norm() <= v.norm());
  CHECK(posterior_activity(v, tau2, 0.05, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
}
