// Copyright (c) 2026 The hlp authors.
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "hlp/coeffs.hpp"
#include "hlp/fourier.hpp"

using namespace hlp;

TEST_CASE("spectrum round trip") {
  for (int d : {2, 3}) {
    TorusGrid grid(d, 16);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    Eigen::VectorXd f(grid.total);
    for (long p = 0; p < grid.total; ++p) f[p] = amp(rng);
    Eigen::VectorXcd spec = real_to_complex(f);
    to_spectrum(grid, spec);
    from_spectrum(grid, spec);
    CHECK((spec.real() - f).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK(spec.imag().lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("trig polynomial amplitudes land on the right modes") {
  TrigPoly p(2, 2.0);
  p.add_mode(Eigen::Vector3i(1, 0, 0), 0.0, 1.0);  // sin(2 pi y1)
  TorusGrid grid(2, 16);
  Eigen::VectorXcd spec = real_to_complex(p.sample_lattice(16));
  to_spectrum(grid, spec);
  CHECK(std::abs(spec[0] - std::complex<double>(2.0, 0.0)) < 1e-13);
  // k=(1,0) lives at flat index 1; amplitude (a - i b)/2 = -i/2.
  CHECK(std::abs(spec[1] - std::complex<double>(0.0, -0.5)) < 1e-13);
  CHECK(std::abs(spec[15] - std::complex<double>(0.0, 0.5)) < 1e-13);
}

TEST_CASE("spectral derivative matches analytic gradients") {
  TrigPoly p(2, 0.3);
  p.add_mode(Eigen::Vector3i(2, -1, 0), 0.7, -0.4);
  p.add_mode(Eigen::Vector3i(0, 3, 0), -0.2, 0.5);
  TorusGrid grid(2, 32);
  Eigen::VectorXcd spec = real_to_complex(p.sample_lattice(32));
  to_spectrum(grid, spec);
  for (int axis : {0, 1}) {
    Eigen::VectorXcd dspec;
    spectral_derivative(grid, spec, axis, dspec);
    from_spectrum(grid, dspec);
    for (long q : {0L, 5L, 100L, 1000L}) {
      Eigen::Vector3d y = grid.point(q);
      CHECK(dspec[q].real() ==
            doctest::Approx(p.gradient(y)[axis]).epsilon(1e-10));
    }
  }
}

TEST_CASE("pad and truncate are inverse on resolved spectra") {
  TorusGrid coarse(2, 16), fine(2, 24);
  TrigPoly p(2, -1.0);
  p.add_mode(Eigen::Vector3i(3, 2, 0), 1.0, 2.0);
  Eigen::VectorXcd spec = real_to_complex(p.sample_lattice(16));
  to_spectrum(coarse, spec);
  Eigen::VectorXcd up = pad_spectrum(coarse, fine, spec);
  Eigen::VectorXcd down = pad_spectrum(fine, coarse, up);
  CHECK((down - spec).lpNorm<Eigen::Infinity>() < 1e-13);

  // Padded field interpolates the same trig polynomial.
  Eigen::VectorXcd vals = up;
  from_spectrum(fine, vals);
  for (long q : {0L, 7L, 200L}) {
    Eigen::Vector3d y = fine.point(q);
    CHECK(vals[q].real() == doctest::Approx(p(y)).epsilon(1e-12));
  }
}

TEST_CASE("eval_spectrum interpolates off-lattice points") {
  TrigPoly p(2, 0.0);
  p.add_mode(Eigen::Vector3i(1, 2, 0), -0.3, 0.8);
  TorusGrid grid(2, 16);
  Eigen::VectorXcd spec = real_to_complex(p.sample_lattice(16));
  to_spectrum(grid, spec);
  Eigen::Vector3d y(0.137, 0.771, 0.0);
  CHECK(eval_spectrum(grid, spec, y) == doctest::Approx(p(y)).epsilon(1e-12));
}
