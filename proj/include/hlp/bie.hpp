// Copyright (c) 2026 The hlp authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include "hlp/kernels.hpp"
#include "hlp/mesh.hpp"

namespace hlp {

enum class BIEKind { Dirichlet, Neumann, Regularity };
enum class LayerOp { Single, TraceK, TraceKstar };

/// Locally corrected Nystrom parameters. The window of (2P+1)^2 parameter
/// cells around each singular/near target is re-integrated in polar
/// coordinates with piecewise-cubic density interpolation; everything else
/// uses the plain product rule.
struct NystromOptions {
  int patch_halfwidth = 0;  // 0: max(3, n_theta/10)
  int n_alpha = 16;
  int n_rho = 10;
  double tikhonov_scale = 1e-5;  // alpha = scale * h^2 for first-kind solves
};

Eigen::MatrixXd assemble_layer_matrix(const BoundaryMesh& mesh,
                                      const KernelContext& ctx, LayerOp op,
                                      const NystromOptions& opts = {});

/// Potential evaluations with automatic near-field quadrature upgrades.
double apply_single_layer(const Eigen::VectorXd& f, const Eigen::Vector3d& x,
                          const KernelContext& ctx, const BoundaryMesh& mesh,
                          const NystromOptions& opts = {});
double apply_double_layer(const Eigen::VectorXd& f, const Eigen::Vector3d& x,
                          const KernelContext& ctx, const BoundaryMesh& mesh,
                          const NystromOptions& opts = {});
Eigen::Vector3d single_layer_gradient(const Eigen::VectorXd& f,
                                      const Eigen::Vector3d& x,
                                      const KernelContext& ctx,
                                      const BoundaryMesh& mesh,
                                      const NystromOptions& opts = {});
Eigen::Vector3d double_layer_gradient(const Eigen::VectorXd& f,
                                      const Eigen::Vector3d& x,
                                      const KernelContext& ctx,
                                      const BoundaryMesh& mesh,
                                      const NystromOptions& opts = {});

/// Nodewise principal-value trace operators (dense assembly inside).
Eigen::VectorXd apply_trace_K(const Eigen::VectorXd& f,
                              const KernelContext& ctx,
                              const BoundaryMesh& mesh,
                              const NystromOptions& opts = {});
Eigen::VectorXd apply_trace_Kstar(const Eigen::VectorXd& f,
                                  const KernelContext& ctx,
                                  const BoundaryMesh& mesh,
                                  const NystromOptions& opts = {});

struct BIESystem {
  BIEKind kind = BIEKind::Dirichlet;
  Eigen::MatrixXd op;  // -1/2 I + K* | 1/2 I + K | S
  BoundaryMesh mesh;
  KernelContext ctx;
  double rcond = 0.0;
};

BIESystem build_system(const BoundaryMesh& mesh, const KernelContext& ctx,
                       BIEKind kind, const NystromOptions& opts = {});

struct SolutionHandle {
  BIEKind kind = BIEKind::Dirichlet;
  BoundaryMesh mesh;
  KernelContext ctx;
  NystromOptions opts;
  Eigen::VectorXd density;
  double solve_residual = 0.0;  // ||M density - data|| / ||data||
  double rcond = 0.0;

  double eval(const Eigen::Vector3d& x) const;
  Eigen::Vector3d grad(const Eigen::Vector3d& x) const;
};

/// Dirichlet: density (-1/2 I + K*)^{-1} g, evaluator D(phi).
/// Throws std::runtime_error on near-singular systems; requires
/// lambda >= max(lambda_hat, mu) via the kernel context.
SolutionHandle solve_dirichlet(const BoundaryMesh& mesh,
                               const KernelContext& ctx,
                               const Eigen::VectorXd& g,
                               const NystromOptions& opts = {});
/// Neumann: density (1/2 I + K)^{-1} f, evaluator S(psi).
SolutionHandle solve_neumann(const BoundaryMesh& mesh,
                             const KernelContext& ctx,
                             const Eigen::VectorXd& f,
                             const NystromOptions& opts = {});
/// Regularity: first-kind S psi = g with Tikhonov parameter
/// tikhonov_scale * h^2; refuses on ill-conditioning.
SolutionHandle solve_regularity(const BoundaryMesh& mesh,
                                const KernelContext& ctx,
                                const Eigen::VectorXd& g,
                                const NystromOptions& opts = {});

/// One-sided limits of grad S(f) along node normals at offsets
/// {t, 2t, 4t} h, Richardson-extrapolated, compared against the jump
/// relations. All deviations are relative L2 (or max where noted).
struct JumpReport {
  double conormal_jump_dev = 0.0;    // (dS/dn)_+ - (dS/dn)_- vs f
  double conormal_plus_dev = 0.0;    // (dS/dn)_+ vs (1/2 I + K) f
  double conormal_minus_dev = 0.0;   // (dS/dn)_- vs (-1/2 I + K) f
  double double_plus_dev = 0.0;      // (D f)_+ vs (-1/2 I + K*) f
  double double_minus_dev = 0.0;     // (D f)_- vs (1/2 I + K*) f
  double gradient_jump_dev = 0.0;    // [grad S] vs n H(n) f, max nodal
  int nodes_checked = 0;
};

JumpReport jump_check(const Eigen::VectorXd& f, const KernelContext& ctx,
                      const BoundaryMesh& mesh,
                      const NystromOptions& opts = {}, int stride = 1);

}  // namespace hlp
