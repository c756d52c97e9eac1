// Copyright (c) 2026 The hlp authors.
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hlp/cell.hpp"

using namespace hlp;

namespace {

// 1D harmonic-mean quadrature oracle for laminates a(y1): the corrector of
// the first direction satisfies a (1 + chi') = (int 1/a)^{-1}.
double laminate_harmonic_mean(int n = 1 << 16) {
  double acc = 0.0;
  for (int j = 0; j < n; ++j) {
    const double y = (j + 0.5) / n;
    acc += 1.0 / (2.0 + std::sin(2.0 * M_PI * y));
  }
  return n / acc;
}

}  // namespace

TEST_CASE("constant coefficients give vanishing correctors") {
  PeriodicCoefficients coeffs = preset_identity(2);
  CorrectorSet set = solve_correctors(coeffs, 16);
  for (const auto& spec : set.chi_hat)
    CHECK(spec.lpNorm<Eigen::Infinity>() < 1e-14);
  CHECK(corrector_residual(set, coeffs) < 1e-12);
}

TEST_CASE("laminate corrector slope matches the harmonic-mean oracle") {
  PeriodicCoefficients coeffs = preset_laminate_2sin(2);
  CorrectorSet set = solve_correctors(coeffs, 128);
  const double hm = laminate_harmonic_mean();
  const double expected = hm / 2.0 - 1.0;  // a(0) = 2
  const double got = set.eval_deriv(1, 0, 0, 0, Eigen::Vector3d::Zero());
  CHECK(got == doctest::Approx(expected).epsilon(1e-8));
  CHECK(got == doctest::Approx(std::sqrt(3.0) / 2.0 - 1.0).epsilon(1e-8));
  // Transverse corrector is zero for the laminate.
  CHECK(set.spectrum(2, 0, 0).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("correctors have exact zero mean") {
  CorrectorSet set = solve_correctors(preset_checkerboard_smooth(2), 64);
  CHECK(set.max_mean_abs <= 1e-12);
}

TEST_CASE("residual certificate") {
  PeriodicCoefficients coeffs = preset_laminate_2sin(2);
  CorrectorSet set = solve_correctors(coeffs, 128);
  CHECK(corrector_residual(set, coeffs) <= 1e-10);

  // A single-mode perturbation grows the residual linearly.
  CorrectorSet bumped = set;
  const double delta = 1e-4;
  TorusGrid grid = set.grid;
  Eigen::VectorXcd& spec = bumped.spectrum(1, 0, 0);
  Eigen::Vector3i mode(3, 2, 0);
  spec[grid.flatten(mode)] += delta;
  const double r1 = corrector_residual(bumped, coeffs);
  spec[grid.flatten(mode)] += delta;  // total 2*delta
  const double r2 = corrector_residual(bumped, coeffs);
  CHECK(r2 / r1 == doctest::Approx(2.0).epsilon(1e-4));
}

TEST_CASE("spectral accuracy: doubling resolution leaves correctors fixed") {
  PeriodicCoefficients coeffs = preset_checkerboard_smooth(2);
  CorrectorSet coarse = solve_correctors(coeffs, 32);
  CorrectorSet fine = solve_correctors(coeffs, 64);
  for (int k = 0; k <= 2; ++k)
    for (const Eigen::Vector3d& y :
         {Eigen::Vector3d(0.0, 0.0, 0.0), Eigen::Vector3d(0.31, 0.17, 0.0),
          Eigen::Vector3d(0.77, 0.51, 0.0)}) {
      CHECK(std::abs(coarse.eval(k, 0, 0, y) - fine.eval(k, 0, 0, y)) <
            1e-10);
    }
}

TEST_CASE("self-adjoint configuration: adjoint correctors coincide") {
  PeriodicCoefficients coeffs = preset_checkerboard_smooth(2);
  // Make it self-adjoint: symmetric A (already), B = V, symmetric c.
  for (int i = 0; i < 2; ++i) coeffs.b(i, 0, 0) = coeffs.v(i, 0, 0);
  CorrectorSet direct = solve_correctors(coeffs, 64, false);
  CorrectorSet adj = solve_correctors(coeffs, 64, true);
  for (int k = 0; k <= 2; ++k) {
    const double gap = (direct.spectrum(k, 0, 0) - adj.spectrum(k, 0, 0))
                           .lpNorm<Eigen::Infinity>();
    CHECK(gap < 1e-10);
  }
}

TEST_CASE("two-component system with decoupled blocks") {
  PeriodicCoefficients coeffs(2, 2);
  coeffs.mu = 1.0;
  for (int i = 0; i < 2; ++i) {
    coeffs.a(i, i, 0, 0).c0 = 2.0;
    coeffs.a(i, i, 0, 0).add_mode(Eigen::Vector3i(1, 0, 0), 0.0, 1.0);
    coeffs.a(i, i, 1, 1).c0 = 3.0;
  }
  CorrectorSet set = solve_correctors(coeffs, 64);
  CHECK(corrector_residual(set, coeffs) < 1e-10);
  // Component (0,0) reproduces the scalar laminate; (1,1) is constant-coeff.
  const double hm = laminate_harmonic_mean();
  CHECK(set.eval_deriv(1, 0, 0, 0, Eigen::Vector3d::Zero()) ==
        doctest::Approx(hm / 2.0 - 1.0).epsilon(1e-8));
  CHECK(set.spectrum(1, 1, 1).lpNorm<Eigen::Infinity>() < 1e-12);
  // Cross blocks stay empty for block-diagonal data.
  CHECK(set.spectrum(1, 0, 1).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("sampler interpolates the spectral field") {
  PeriodicCoefficients coeffs = preset_laminate_2sin(2);
  CorrectorSet set = solve_correctors(coeffs, 64);
  for (const Eigen::Vector3d& y :
       {Eigen::Vector3d(0.123, 0.456, 0.0), Eigen::Vector3d(0.9, 0.05, 0.0)}) {
    CHECK(set.sample(1, 0, 0, y) ==
          doctest::Approx(set.eval(1, 0, 0, y)).epsilon(1e-7));
  }
}

TEST_CASE("grid preconditions") {
  PeriodicCoefficients coeffs = preset_laminate_2sin(2);
  CHECK_THROWS_AS(solve_correctors(coeffs, 48), std::invalid_argument);
  CHECK_THROWS_AS(solve_correctors(coeffs, 1), std::invalid_argument);
}
