// Copyright (c) 2026 The hlp authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <complex>

namespace hlp {

/// Uniform periodic lattice on the unit torus, y_j = j/N per axis, flattened
/// with the first axis fastest.
struct TorusGrid {
  int d = 2;
  int N = 0;
  long total = 0;

  TorusGrid() = default;
  TorusGrid(int dim, int n);

  /// Signed wavenumber of transform index t in [0, N).
  int wavenumber(int t) const { return t <= N / 2 - 1 ? t : t - N; }

  Eigen::Vector3i unflatten(long p) const;
  long flatten(const Eigen::Vector3i& idx) const;
  Eigen::Vector3d point(long p) const;
};

// In-place multidimensional transforms. to_spectrum applies the 1/N^d
// normalization, so coefficients match trig-polynomial amplitudes:
// a cos + b sin at wave vector k maps to (a - i b)/2 at k.
void to_spectrum(const TorusGrid& grid, Eigen::VectorXcd& data);
void from_spectrum(const TorusGrid& grid, Eigen::VectorXcd& data);

Eigen::VectorXcd real_to_complex(const Eigen::VectorXd& f);
Eigen::VectorXd complex_to_real(const Eigen::VectorXcd& f);

/// out = (d/dy_axis) in, acting on spectra.
void spectral_derivative(const TorusGrid& grid, const Eigen::VectorXcd& in,
                         int axis, Eigen::VectorXcd& out);

/// Embed a spectrum into a finer grid (M >= N) or gather back (M <= N).
Eigen::VectorXcd pad_spectrum(const TorusGrid& from, const TorusGrid& to,
                              const Eigen::VectorXcd& spec);

/// L2(Y) norm of a spectrum (Parseval).
double spectrum_norm(const Eigen::VectorXcd& spec);

/// Evaluates a spectrum at an arbitrary torus point by direct mode summation.
double eval_spectrum(const TorusGrid& grid, const Eigen::VectorXcd& spec,
                     const Eigen::Vector3d& y);

}  // namespace hlp
