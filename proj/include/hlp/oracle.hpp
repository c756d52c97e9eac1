// Copyright (c) 2026 The hlp authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

#include "hlp/coeffs.hpp"
#include "hlp/grid.hpp"

namespace hlp {

struct OracleOptions {
  double tol = 1e-10;  // relative residual of the discrete system
  int max_iters = 60000;
  bool quiet = true;
};

struct SolveInfo {
  int iters = 0;
  double rel_residual = 0.0;
  bool symmetric = false;
  long unknowns = 0;
};

class OracleSolveError : public std::runtime_error {
 public:
  OracleSolveError(const std::string& what, double residual)
      : std::runtime_error(what), final_residual(residual) {}
  double final_residual;
};

/// Pointwise data: maps a physical point to an m-vector.
using FieldFunction =
    std::function<Eigen::VectorXd(const Eigen::Vector3d&)>;

/// Conservative second-order finite-difference solve of
///   -div(A(x/eps) grad u + V(x/eps) u) + B(x/eps) grad u
///     + (c(x/eps) + lambda) u = F
/// on a cube with n nodes per axis. Dirichlet data are imposed at boundary
/// nodes; Neumann data prescribe n.(A grad u + V u) by second-order
/// one-sided collocation at boundary nodes (first order near edges).
/// Requires lambda >= max(lambda0, mu) and >= 8 grid cells per period.
GridField direct_solve_box(const PeriodicCoefficients& coeffs,
                           const OperatorParams& params, const BoxDomain& box,
                           BCKind bc, const FieldFunction& bc_data,
                           const FieldFunction& forcing, int n,
                           const OracleOptions& opts = {},
                           SolveInfo* info = nullptr);

/// Dirichlet solve on a ball embedded in its bounding cube; cut cells use
/// Shortley-Weller fractional arms (first-order lower-order terms at cuts).
GridField direct_solve_ball(const PeriodicCoefficients& coeffs,
                            const OperatorParams& params,
                            const EmbeddedBall& ball,
                            const FieldFunction& g,
                            const FieldFunction& forcing, int n,
                            const OracleOptions& opts = {},
                            SolveInfo* info = nullptr);

/// Zero-Dirichlet box solve with a discrete delta (h^{-d} at the nearest
/// node, component comp); mid-range values approximate the fundamental
/// solution.
GridField discrete_green(const PeriodicCoefficients& coeffs,
                         const OperatorParams& params,
                         const Eigen::Vector3d& source, const BoxDomain& box,
                         int n, int comp = 0, const OracleOptions& opts = {},
                         SolveInfo* info = nullptr);

/// [mu |grad u|^2_{B_R} + lambda |u|^2_{B_R}]^{1/2} R / |u|_{B_2R};
/// returns 0 for vanishing fields. Throws if B(center, 2R) leaves the
/// domain.
double caccioppoli_ratio(const GridField& field, double mu, double lambda,
                         const Eigen::Vector3d& center, double R);

}  // namespace hlp
