// Copyright (c) 2026 The hlp authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include "hlp/homog.hpp"

namespace hlp {

/// Scalar (m=1) constant-coefficient kernel data for
///   L0 = -div(A grad + V) + B grad + c + lambda.
/// The fundamental solution factorizes as
///   Gamma_0(x) = exp(tilt . x) (det A)^{-1/2} Phi_L(r_A),
/// with tilt = A^{-1}(B - V)/2, r_A = sqrt(x A^{-1} x), and Phi_L the radial
/// kernel of -Laplace + L at L = lambda + c + (B-V) A^{-1} (B-V)/4.
struct KernelContext {
  int d = 3;
  Eigen::Matrix3d A = Eigen::Matrix3d::Identity();
  Eigen::Vector3d V = Eigen::Vector3d::Zero();
  Eigen::Vector3d B = Eigen::Vector3d::Zero();
  double c = 0.0;
  double lambda = 1.0;

  Eigen::Matrix3d A_inv = Eigen::Matrix3d::Identity();
  double sqrt_det = 1.0;
  Eigen::Vector3d tilt = Eigen::Vector3d::Zero();
  double L = 1.0;

  /// d x d data embedded in 3x3 containers (unused entries identity/zero).
  /// Throws if A is not SPD or, lazily on evaluation, if L <= 0.
  static KernelContext make(int d, const Eigen::Matrix3d& A,
                            const Eigen::Vector3d& V,
                            const Eigen::Vector3d& B, double c, double lambda,
                            bool include_c_in_L = true);
  static KernelContext from_homogenized(const HomogenizedCoefficients& H,
                                        double lambda,
                                        bool include_c_in_L = true);

  /// Parameter swap V <-> B (constant-coefficient adjoint).
  KernelContext adjoint() const;

  double r_A(const Eigen::Vector3d& x) const;
};

/// Fundamental solution of -div(A grad): the Laplace kernel composed with
/// the affine map A^{-1/2}, scaled by (det A)^{-1/2}. d=2 is logarithmic.
double gamma_hatA(const Eigen::Vector3d& x, const KernelContext& ctx);
Eigen::Vector3d gamma_hatA_grad(const Eigen::Vector3d& x,
                                const KernelContext& ctx);

/// Fundamental solution of L0; throws std::domain_error when L <= 0
/// (operator not coercive) or x = 0.
double gamma_0(const Eigen::Vector3d& x, const KernelContext& ctx);
Eigen::Vector3d gamma_0_grad(const Eigen::Vector3d& x,
                             const KernelContext& ctx);
Eigen::Matrix3d gamma_0_hess(const Eigen::Vector3d& x,
                             const KernelContext& ctx);

struct DifferenceRate {
  double slope = 0.0;
  bool exact = false;  // difference at rounding level; slope meaningless
  double max_rel_diff = 0.0;
};

/// Least-squares slope of log |grad^l (Gamma_0 - Gamma_A)| against log |x|
/// over |x| in [1e-3, 1e-1] along a fixed ray; near-diagonal comparison of
/// the two kernels. l in {0, 1}.
DifferenceRate kernel_difference_rate(const KernelContext& ctx, int l);

}  // namespace hlp
