// Copyright (c) 2026 The hlp authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "hlp/cell.hpp"
#include "hlp/coeffs.hpp"

namespace hlp {

/// Constant homogenized tensors of -div(A_hat grad + V_hat) + B_hat grad +
/// c_hat + lambda.
struct HomogenizedCoefficients {
  int d = 2, m = 1;
  double mu = 1.0;
  Eigen::MatrixXd A_hat;               // (m*d) x (m*d), row alpha*d+i
  std::vector<Eigen::MatrixXd> V_hat;  // per i: m x m
  std::vector<Eigen::MatrixXd> B_hat;  // per i: m x m
  Eigen::MatrixXd c_hat;               // m x m
  double lambda = 0.0;
  Eigen::VectorXd corrector_energy;  // ||grad chi_k||_{L2(Y)} per k

  double a(int i, int j, int alpha, int beta) const {
    return A_hat(alpha * d + i, beta * d + j);
  }

  /// Constant-coefficient view: all tensors as (trivially periodic) fields,
  /// for feeding the finite-difference oracle.
  PeriodicCoefficients as_constant_coefficients() const;
};

/// Y-averages of the homogenized-tensor integrands, read off the zeroth
/// Fourier mode of dealiased spectral products. Refuses when the corrector
/// certificate exceeds residual_tol.
HomogenizedCoefficients effective_tensors(const PeriodicCoefficients& coeffs,
                                          const CorrectorSet& correctors,
                                          double residual_tol = 1e-6);

struct PropertyReport {
  struct Check {
    std::string name;
    bool pass;
    double margin;  // signed distance to the threshold
  };
  std::vector<Check> checks;
  bool all_pass() const;
  std::string to_string() const;
};

/// Verifies ellipticity of A_hat, symmetry when A = A*, and boundedness of
/// the lower-order tensors, with numeric margins.
PropertyReport verify_effective_properties(const HomogenizedCoefficients& H,
                                           const PeriodicCoefficients& coeffs);

/// lambda0 formula applied to the homogenized tensors (used as the
/// coercivity threshold lambda_hat of the homogenized operator).
double effective_lambda0(const HomogenizedCoefficients& H, double c_md = 4.0);

/// JSON export, row-major with documented index order (i,j,alpha,beta).
std::string homogenized_to_json(const HomogenizedCoefficients& H);
HomogenizedCoefficients homogenized_from_json(const std::string& text);

}  // namespace hlp
