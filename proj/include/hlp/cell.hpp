// Copyright (c) 2026 The hlp authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "hlp/coeffs.hpp"
#include "hlp/fourier.hpp"

namespace hlp {

struct CellSolveOptions {
  double tol = 1e-12;  // relative residual of the spectral system
  int max_iters = 600;
  int sampler_upsample = 0;  // 0: pick automatically when sampling is used
};

class CellSolveError : public std::runtime_error {
 public:
  CellSolveError(const std::string& what, double residual)
      : std::runtime_error(what), final_residual(residual) {}
  double final_residual;
};

/// Correctors chi_0,...,chi_d of the cell problems on the unit torus,
///   div(A grad chi_k + A e_k) = 0 (1 <= k <= d),  div(A grad chi_0 + V) = 0,
/// stored spectrally as m x m matrix fields with exact zero mean.
struct CorrectorSet {
  int d = 2, m = 1, N = 0;
  bool adjoint = false;
  TorusGrid grid;
  std::vector<Eigen::VectorXcd> chi_hat;  // [(k*m+alpha)*m+beta]
  Eigen::VectorXd residuals;              // per k, L2(Y) of div(flux)
  double max_mean_abs = 0.0;

  const Eigen::VectorXcd& spectrum(int k, int alpha, int beta) const;
  Eigen::VectorXcd& spectrum(int k, int alpha, int beta);

  /// Exact evaluation by mode summation (slow; tests and spot checks).
  double eval(int k, int alpha, int beta, const Eigen::Vector3d& y) const;
  double eval_deriv(int k, int axis, int alpha, int beta,
                    const Eigen::Vector3d& y) const;

  /// Periodic cubic interpolation from a cached upsampled grid.
  void build_sampler(int upsample = 0) const;
  double sample(int k, int alpha, int beta, const Eigen::Vector3d& y) const;

 private:
  mutable int sampler_n_ = 0;
  mutable std::vector<Eigen::VectorXd> sampler_values_;
};

/// Fourier collocation solve of the corrector problems; grid must be a
/// power of two with N >= 2x coefficient bandwidth. When adjoint is set the
/// problems use A* and V* = B^t.
CorrectorSet solve_correctors(const PeriodicCoefficients& coeffs, int N,
                              bool adjoint = false,
                              const CellSolveOptions& opts = {});

/// A posteriori certificate: max over k of || div(A grad chi_k + rhs_k) ||_L2,
/// evaluated spectrally with dealiased products.
double corrector_residual(const CorrectorSet& set,
                          const PeriodicCoefficients& coeffs);

/// Sampled-grid dump (flat binary, doubles) plus a JSON header; optionally a
/// CSV copy. Files: <prefix>.bin, <prefix>.json, [<prefix>.csv].
void export_correctors(const CorrectorSet& set, const std::string& prefix,
                       bool csv = false);

}  // namespace hlp
