// Copyright (c) 2026 The hlp authors.
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hlp/bessel.hpp"

using namespace hlp;

namespace {

// Integral-representation quadrature oracle:
//   K_nu(z) = int_0^inf exp(-z cosh t) cosh(nu t) dt,
// composite Gauss-Legendre on [0, T] with z (cosh T - 1) ~ 46.
double bessel_k_quadrature(double nu, double z) {
  static const double gl_x[12] = {
      -0.9815606342467192, -0.9041172563704749, -0.7699026741943047,
      -0.5873179542866175, -0.3678314989981802, -0.1252334085114689,
      0.1252334085114689,  0.3678314989981802,  0.5873179542866175,
      0.7699026741943047,  0.9041172563704749,  0.9815606342467192};
  static const double gl_w[12] = {
      0.0471753363865118, 0.1069393259953184, 0.1600783285433462,
      0.2031674267230659, 0.2334925365383548, 0.2491470458134028,
      0.2491470458134028, 0.2334925365383548, 0.2031674267230659,
      0.1600783285433462, 0.1069393259953184, 0.0471753363865118};
  const double T = std::acosh(1.0 + 46.0 / z);
  const int panels = 160;
  const double hp = T / panels;
  double acc = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double a = p * hp, b = a + hp;
    for (int q = 0; q < 12; ++q) {
      const double t = 0.5 * (a + b) + 0.5 * hp * gl_x[q];
      acc += 0.5 * hp * gl_w[q] *
             std::exp(-z * std::cosh(t)) * std::cosh(nu * t);
    }
  }
  return acc;
}

}  // namespace

TEST_CASE("half-integer closed form") {
  // K_{1/2}(1) = sqrt(pi/2) * e^{-1}
  const double expected = std::sqrt(M_PI / 2.0) * std::exp(-1.0);
  CHECK(bessel_k(0.5, 1.0) == doctest::Approx(expected).epsilon(1e-12));
  // K_{3/2}(z) = sqrt(pi/(2z)) e^{-z} (1 + 1/z)
  const double z = 3.7;
  const double k32 = std::sqrt(M_PI / (2.0 * z)) * std::exp(-z) *
                     (1.0 + 1.0 / z);
  CHECK(bessel_k(1.5, z) == doctest::Approx(k32).epsilon(1e-12));
}

TEST_CASE("matches the integral-representation oracle") {
  for (double nu : {0.0, 1.0 / 3.0, 0.5, 1.0, 2.5}) {
    for (double z : {1e-6, 0.03, 0.5, 1.9, 2.1, 10.0, 100.0, 600.0}) {
      const double ours = bessel_k(nu, z);
      const double oracle = bessel_k_quadrature(nu, z);
      CHECK(std::abs(ours - oracle) <= 1e-10 * std::abs(oracle));
    }
  }
}

TEST_CASE("three-term recurrence holds to 1e-10") {
  for (double nu : {1.0, 1.3, 1.7, 3.5}) {
    for (double z : {0.2, 1.0, 2.5, 20.0, 300.0}) {
      const double lhs = bessel_k(nu + 1.0, z) - bessel_k(nu - 1.0, z) -
                         (2.0 * nu / z) * bessel_k(nu, z);
      CHECK(std::abs(lhs) <= 1e-10 * bessel_k(nu + 1.0, z));
    }
  }
}

TEST_CASE("leading asymptotic term") {
  // Ratio approaches 1 like (4 nu^2 - 1)/(8z); check the trend and the
  // final gap at z = 700.
  for (double nu : {0.0, 1.0}) {
    double prev_gap = 1.0;
    double gap = 1.0;
    for (double z : {100.0, 300.0, 700.0}) {
      const double ratio =
          bessel_k(nu, z) * std::sqrt(2.0 * z / M_PI) * std::exp(z);
      gap = std::abs(ratio - 1.0);
      CHECK(gap <= prev_gap + 1e-12);
      prev_gap = gap;
    }
    CHECK(gap < 1e-3);
  }
}

TEST_CASE("underflow and domain errors") {
  CHECK(bessel_k(0.5, 800.0) == 0.0);
  CHECK_THROWS_AS(bessel_k(0.5, 0.0), std::domain_error);
  CHECK_THROWS_AS(bessel_k(0.5, -1.0), std::domain_error);
  CHECK_THROWS_AS(bessel_k(-0.5, 1.0), std::domain_error);
}
