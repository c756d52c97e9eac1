// Copyright (c) 2026 The hlp authors.
// SPDX-License-Identifier: Apache-2.0
#include "hlp/bie.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace hlp {

namespace {

constexpr double kPi = std::numbers::pi;

struct GLRule {
  Eigen::VectorXd x, w;  // on [-1, 1]
};

GLRule gauss_legendre(int n) {
  GLRule rule;
  rule.x.resize(n);
  rule.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    rule.x[i] = -z;
    rule.x[n - 1 - i] = z;
    rule.w[i] = rule.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
  return rule;
}

const GLRule& cached_gl(int n) {
  static thread_local std::vector<GLRule> cache(65);
  if (n >= static_cast<int>(cache.size()) || cache[n].x.size() == 0) {
    if (n >= static_cast<int>(cache.size())) cache.resize(n + 1);
    cache[n] = gauss_legendre(n);
  }
  return cache[n];
}

// Kernels: channels evaluated at (target x, source y, source normal ny).
struct SingleKernel {
  static constexpr int NC = 1;
  const KernelContext* ctx;
  void eval(const Eigen::Vector3d& x, const Eigen::Vector3d& y,
            const Eigen::Vector3d&, double* out) const {
    out[0] = gamma_0(x - y, *ctx);
  }
};

struct DoubleKernel {  // n(y) . A grad_y Gamma_0(x - y); also the K* kernel
  static constexpr int NC = 1;
  const KernelContext* ctx;
  void eval(const Eigen::Vector3d& x, const Eigen::Vector3d& y,
            const Eigen::Vector3d& ny, double* out) const {
    out[0] = -ny.dot(ctx->A * gamma_0_grad(x - y, *ctx));
  }
};

struct TraceKKernel {  // (A n(P)) . grad_x Gamma_0(x - y), row target fixed
  static constexpr int NC = 1;
  const KernelContext* ctx;
  Eigen::Vector3d dir;
  void eval(const Eigen::Vector3d& x, const Eigen::Vector3d& y,
            const Eigen::Vector3d&, double* out) const {
    out[0] = dir.dot(gamma_0_grad(x - y, *ctx));
  }
};

struct SingleGradKernel {
  static constexpr int NC = 3;
  const KernelContext* ctx;
  void eval(const Eigen::Vector3d& x, const Eigen::Vector3d& y,
            const Eigen::Vector3d&, double* out) const {
    const Eigen::Vector3d g = gamma_0_grad(x - y, *ctx);
    out[0] = g[0];
    out[1] = g[1];
    out[2] = g[2];
  }
};

struct DoubleGradKernel {
  static constexpr int NC = 3;
  const KernelContext* ctx;
  void eval(const Eigen::Vector3d& x, const Eigen::Vector3d& y,
            const Eigen::Vector3d& ny, double* out) const {
    const Eigen::Vector3d g =
        -(gamma_0_hess(x - y, *ctx) * (ctx->A * ny));
    out[0] = g[0];
    out[1] = g[1];
    out[2] = g[2];
  }
};

struct PatchParams {
  int P = 3;
  int n_alpha = 16;
  int n_rho = 10;
};

PatchParams patch_params(const BoundaryMesh& mesh,
                         const NystromOptions& opts) {
  PatchParams pp;
  pp.P = opts.patch_halfwidth > 0 ? opts.patch_halfwidth
                                  : std::max(3, mesh.n_theta / 10);
  pp.n_alpha = opts.n_alpha;
  pp.n_rho = opts.n_rho;
  if (mesh.n_theta < 3 * pp.P || mesh.n_phi < 2 * pp.P + 4)
    throw std::invalid_argument("mesh too coarse for the singular patch");
  return pp;
}

inline void cubic_weights(double t, double w[4]) {
  w[0] = -t * (t - 1.0) * (t - 2.0) / 6.0;
  w[1] = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
  w[2] = -(t + 1.0) * t * (t - 2.0) / 2.0;
  w[3] = (t + 1.0) * t * (t - 1.0) / 6.0;
}

inline double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a[0] * b[1] - a[1] * b[0];
}

// Correction patch around a (near-)singular target. Bulk rows use an index
// rectangle of cells, phi-widened at low latitudes; rows whose window would
// cross a pole use the full polar cap, integrated in tangent-plane
// (azimuthal equidistant) coordinates. Either region is an exact union of
// node cells.
struct PatchSpec {
  bool cap = false;
  bool south = false;
  int ktc = 0, kpc = 0;
  int Pt = 3, Pp = 3;  // rectangle half-widths in cells
  int cap_rows = 0;    // cap: rows 0..cap_rows (or mirrored) included
};

PatchSpec make_patch_spec(const BoundaryMesh& mesh, const PatchParams& pp,
                          int ktc, int kpc) {
  PatchSpec spec;
  spec.ktc = ktc;
  spec.kpc = kpc;
  spec.Pt = pp.P;
  if (ktc < pp.P) {
    spec.cap = true;
    spec.cap_rows = ktc + pp.P;
    return spec;
  }
  if (ktc > mesh.n_theta - 1 - pp.P) {
    spec.cap = true;
    spec.south = true;
    spec.cap_rows = (mesh.n_theta - 1 - ktc) + pp.P;
    return spec;
  }
  const double sth = std::sin(mesh.theta_tilde(ktc));
  const int pphi = static_cast<int>(std::ceil(pp.P / std::max(sth, 1e-6)));
  spec.Pp = std::min(std::max(pp.P, pphi), mesh.n_phi / 4 - 1);
  return spec;
}

void window_nodes(const BoundaryMesh& mesh, const PatchSpec& spec,
                  std::vector<long>& out) {
  out.clear();
  if (spec.cap) {
    for (int r = 0; r <= spec.cap_rows; ++r) {
      const int kt = spec.south ? mesh.n_theta - 1 - r : r;
      for (int kp = 0; kp < mesh.n_phi; ++kp)
        out.push_back(mesh.id(kt, kp));
    }
    return;
  }
  for (int dt = -spec.Pt; dt <= spec.Pt; ++dt)
    for (int dp = -spec.Pp; dp <= spec.Pp; ++dp)
      out.push_back(mesh.fold(spec.ktc + dt, spec.kpc + dp));
}

// Shared radial-panel/angle loop. plane_to_surface maps local 2D coords to
// (theta_tilde, phi) plus the area factor d(theta,phi)/d(plane).
template <typename K, typename A, typename Map>
void polar_sweep(const BoundaryMesh& mesh, const K& kernel,
                 const Eigen::Vector3d& x_target, const Eigen::Vector2d& q,
                 double alpha0, double dalpha, int n_alpha,
                 const std::function<double(double, const Eigen::Vector2d&)>&
                     rho_max_fn,
                 double near_scale, const PatchParams& pp, const Map& map,
                 A&& accum) {
  const GLRule& ga = cached_gl(std::min(n_alpha, 64));
  const GLRule& gr = cached_gl(pp.n_rho);
  double kv[3];
  for (int ia = 0; ia < ga.x.size(); ++ia) {
    const double alpha = alpha0 + 0.5 * (ga.x[ia] + 1.0) * dalpha;
    const double wa = 0.5 * dalpha * ga.w[ia];
    const Eigen::Vector2d omega(std::cos(alpha), std::sin(alpha));
    const double rho_max = rho_max_fn(alpha, omega);
    if (!(rho_max > 1e-14)) continue;

    double bounds[18];
    int nb = 0;
    bounds[nb++] = 0.0;
    if (near_scale > 0.0 && near_scale < rho_max) {
      double r = near_scale;
      while (r < rho_max && nb < 16) {
        bounds[nb++] = r;
        r *= 2.0;
      }
    } else {
      bounds[nb++] = rho_max / 4.0;
    }
    bounds[nb++] = rho_max;

    for (int pb = 0; pb + 1 < nb; ++pb) {
      const double r0 = bounds[pb], r1 = bounds[pb + 1];
      for (int ir = 0; ir < gr.x.size(); ++ir) {
        const double rho = 0.5 * (r0 + r1) + 0.5 * (r1 - r0) * gr.x[ir];
        const double wr = 0.5 * (r1 - r0) * gr.w[ir];
        const Eigen::Vector2d pt = q + rho * omega;
        double tht, ph, area_factor;
        map(pt, &tht, &ph, &area_factor);
        Eigen::Vector3d y, ny;
        double J;
        mesh.cover_frame(tht, ph, &y, &ny, &J);
        kernel.eval(x_target, y, ny, kv);
        const double qw = rho * wr * wa * J * area_factor;

        const double rt = tht / mesh.dth - 0.5;
        const double rp = ph / mesh.dph;
        const int kt0 = static_cast<int>(std::floor(rt));
        const int kp0 = static_cast<int>(std::floor(rp));
        double wt[4], wp[4];
        cubic_weights(rt - kt0, wt);
        cubic_weights(rp - kp0, wp);
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) {
            const long node = mesh.fold(kt0 - 1 + a, kp0 - 1 + b);
            accum(node, kv, qw * wt[a] * wp[b]);
          }
      }
    }
  }
}

// pole_th, pole_ph: double-cover parameters of the singular point (the
// target itself for Nystrom rows, the surface projection for near
// evaluation). near_uv: grading scale in local metric units (0 on-surface).
template <typename K, typename A>
void patch_integrate(const BoundaryMesh& mesh, const K& kernel,
                     const Eigen::Vector3d& x_target, const PatchSpec& spec,
                     double pole_th, double pole_ph, double near_uv,
                     const PatchParams& pp, A&& accum) {
  if (spec.cap) {
    // Azimuthal-equidistant plane at the pole: (a,b) = r (cos phi, sin phi)
    // with r = theta (north) or pi - theta (south). dtheta dphi = da db / r.
    const bool south = spec.south;
    const double cap_radius = (spec.cap_rows + 1) * mesh.dth;
    const double rstar = south ? kPi - pole_th : pole_th;
    const Eigen::Vector2d q(rstar * std::cos(pole_ph),
                            rstar * std::sin(pole_ph));
    auto map = [&](const Eigen::Vector2d& pt, double* tht, double* ph,
                   double* fac) {
      const double r = pt.norm();
      *tht = south ? kPi - r : r;
      *ph = std::atan2(pt[1], pt[0]);
      *fac = 1.0 / std::max(r, 1e-14);
    };
    auto rho_max_fn = [&](double, const Eigen::Vector2d& omega) {
      const double b = q.dot(omega);
      const double disc = b * b + cap_radius * cap_radius - q.squaredNorm();
      return -b + std::sqrt(std::max(disc, 0.0));
    };
    // Quarter-circle chunks keep the angular rule well resolved.
    for (int c = 0; c < 4; ++c)
      polar_sweep(mesh, kernel, x_target, q, 0.5 * kPi * c, 0.5 * kPi,
                  pp.n_alpha, rho_max_fn, near_uv, pp, map,
                  std::forward<A>(accum));
    return;
  }

  const double thc = mesh.theta_tilde(spec.ktc);
  const double phc = spec.kpc * mesh.dph;
  Eigen::Vector3d xx, xt, xp;
  mesh.shape->frame(thc, phc, &xx, &xt, &xp);
  const double s = std::max(xp.norm() / xt.norm(), 1e-8);

  const double Wu = (spec.Pt + 0.5) * mesh.dth;
  const double Wv = (spec.Pp + 0.5) * mesh.dph * s;
  const double dphi = std::remainder(pole_ph - phc, 2.0 * kPi);
  const Eigen::Vector2d q(pole_th - thc, s * dphi);
  auto map = [&](const Eigen::Vector2d& pt, double* tht, double* ph,
                 double* fac) {
    *tht = thc + pt[0];
    *ph = phc + pt[1] / s;
    *fac = 1.0 / s;
  };
  const Eigen::Vector2d corners[4] = {
      {Wu, Wv}, {-Wu, Wv}, {-Wu, -Wv}, {Wu, -Wv}};
  for (int e = 0; e < 4; ++e) {
    const Eigen::Vector2d A2 = corners[e] - q;
    const Eigen::Vector2d B2 = corners[(e + 1) % 4] - q;
    const double crossAB = cross2(A2, B2);
    if (std::abs(crossAB) < 1e-30) continue;
    const double a0 = std::atan2(A2[1], A2[0]);
    double dalpha = std::atan2(B2[1], B2[0]) - a0;
    while (dalpha <= 0.0) dalpha += 2.0 * kPi;
    auto rho_max_fn = [&](double, const Eigen::Vector2d& omega) {
      // Ray rho*omega meets A->B at rho = cross(A,B)/cross(omega, B-A).
      const double denom = cross2(omega, B2 - A2);
      if (std::abs(denom) < 1e-30) return 0.0;
      return crossAB / denom;
    };
    polar_sweep(mesh, kernel, x_target, q, a0, dalpha, pp.n_alpha,
                rho_max_fn, near_uv, pp, map, std::forward<A>(accum));
  }
}

template <typename K>
void assemble_row(const BoundaryMesh& mesh, const K& kernel, long i,
                  const PatchParams& pp, double* row) {
  const long N = mesh.size();
  const Eigen::Vector3d x = mesh.nodes.row(i);
  double kv[3];
  for (long j = 0; j < N; ++j) {
    if (j == i) {
      row[j] = 0.0;
      continue;
    }
    kernel.eval(x, mesh.nodes.row(j), mesh.normals.row(j), kv);
    row[j] = mesh.weights[j] * kv[0];
  }
  const int ktc = static_cast<int>(i / mesh.n_phi);
  const int kpc = static_cast<int>(i % mesh.n_phi);
  const PatchSpec spec = make_patch_spec(mesh, pp, ktc, kpc);
  std::vector<long> window;
  window_nodes(mesh, spec, window);
  for (long node : window) row[node] = 0.0;
  patch_integrate(mesh, kernel, x, spec, mesh.theta[i], mesh.phi[i], 0.0, pp,
                  [&](long node, const double* k, double w) {
                    row[node] += k[0] * w;
                  });
}

// Evaluation of a layer potential (NC channels) at an arbitrary point with
// automatic near-field correction.
template <typename K>
void eval_point(const BoundaryMesh& mesh, const K& kernel,
                const Eigen::VectorXd& f, const Eigen::Vector3d& x,
                const PatchParams& pp, double* out) {
  const long N = mesh.size();
  double kv[3];
  for (int c = 0; c < K::NC; ++c) out[c] = 0.0;
  for (long j = 0; j < N; ++j) {
    kernel.eval(x, mesh.nodes.row(j), mesh.normals.row(j), kv);
    for (int c = 0; c < K::NC; ++c) out[c] += mesh.weights[j] * kv[c] * f[j];
  }

  const long i0 = mesh.nearest_node(x);
  const Eigen::Vector2d tp =
      mesh.shape->project(x, mesh.theta[i0], mesh.phi[i0]);
  const Eigen::Vector3d ystar = mesh.shape->point(tp[0], tp[1]);
  const double t = (x - ystar).norm();
  Eigen::Vector3d xx, xt, xp;
  mesh.shape->frame(tp[0], tp[1], &xx, &xt, &xp);
  const double h_loc = mesh.dth * xt.norm();
  if (t > (pp.P + 1) * h_loc) return;

  double phs = tp[1];
  while (phs < 0.0) phs += 2.0 * kPi;
  while (phs >= 2.0 * kPi) phs -= 2.0 * kPi;
  int ktc = static_cast<int>(std::lround(tp[0] / mesh.dth - 0.5));
  int kpc = static_cast<int>(std::lround(phs / mesh.dph)) % mesh.n_phi;
  ktc = std::min(std::max(ktc, 0), mesh.n_theta - 1);

  const PatchSpec spec = make_patch_spec(mesh, pp, ktc, kpc);
  std::vector<long> window;
  window_nodes(mesh, spec, window);
  for (long node : window) {
    kernel.eval(x, mesh.nodes.row(node), mesh.normals.row(node), kv);
    for (int c = 0; c < K::NC; ++c)
      out[c] -= mesh.weights[node] * kv[c] * f[node];
  }

  const double near_uv = std::max(t / xt.norm(), 1e-3 * mesh.dth);
  patch_integrate(mesh, kernel, x, spec, tp[0], phs, near_uv, pp,
                  [&](long node, const double* k, double w) {
                    for (int c = 0; c < K::NC; ++c)
                      out[c] += k[c] * w * f[node];
                  });
}

}  // namespace

Eigen::MatrixXd assemble_layer_matrix(const BoundaryMesh& mesh,
                                      const KernelContext& ctx, LayerOp op,
                                      const NystromOptions& opts) {
  if (ctx.d != 3)
    throw std::invalid_argument("boundary integral operators require d = 3");
  const PatchParams pp = patch_params(mesh, opts);
  const long N = mesh.size();
  Eigen::MatrixXd M(N, N);
#pragma omp parallel for schedule(dynamic, 8)
  for (long i = 0; i < N; ++i) {
    std::vector<double> row(N);
    if (op == LayerOp::Single) {
      SingleKernel k{&ctx};
      assemble_row(mesh, k, i, pp, row.data());
    } else if (op == LayerOp::TraceKstar) {
      DoubleKernel k{&ctx};
      assemble_row(mesh, k, i, pp, row.data());
    } else {
      TraceKKernel k{&ctx, ctx.A * mesh.normals.row(i).transpose()};
      assemble_row(mesh, k, i, pp, row.data());
    }
    for (long j = 0; j < N; ++j) M(i, j) = row[j];
  }
  return M;
}

double apply_single_layer(const Eigen::VectorXd& f, const Eigen::Vector3d& x,
                          const KernelContext& ctx, const BoundaryMesh& mesh,
                          const NystromOptions& opts) {
  const PatchParams pp = patch_params(mesh, opts);
  SingleKernel k{&ctx};
  double out[1];
  eval_point(mesh, k, f, x, pp, out);
  return out[0];
}

double apply_double_layer(const Eigen::VectorXd& f, const Eigen::Vector3d& x,
                          const KernelContext& ctx, const BoundaryMesh& mesh,
                          const NystromOptions& opts) {
  const PatchParams pp = patch_params(mesh, opts);
  DoubleKernel k{&ctx};
  double out[1];
  eval_point(mesh, k, f, x, pp, out);
  return out[0];
}

Eigen::Vector3d single_layer_gradient(const Eigen::VectorXd& f,
                                      const Eigen::Vector3d& x,
                                      const KernelContext& ctx,
                                      const BoundaryMesh& mesh,
                                      const NystromOptions& opts) {
  const PatchParams pp = patch_params(mesh, opts);
  SingleGradKernel k{&ctx};
  double out[3];
  eval_point(mesh, k, f, x, pp, out);
  return Eigen::Vector3d(out[0], out[1], out[2]);
}

Eigen::Vector3d double_layer_gradient(const Eigen::VectorXd& f,
                                      const Eigen::Vector3d& x,
                                      const KernelContext& ctx,
                                      const BoundaryMesh& mesh,
                                      const NystromOptions& opts) {
  const PatchParams pp = patch_params(mesh, opts);
  DoubleGradKernel k{&ctx};
  double out[3];
  eval_point(mesh, k, f, x, pp, out);
  return Eigen::Vector3d(out[0], out[1], out[2]);
}

Eigen::VectorXd apply_trace_K(const Eigen::VectorXd& f,
                              const KernelContext& ctx,
                              const BoundaryMesh& mesh,
                              const NystromOptions& opts) {
  return assemble_layer_matrix(mesh, ctx, LayerOp::TraceK, opts) * f;
}

Eigen::VectorXd apply_trace_Kstar(const Eigen::VectorXd& f,
                                  const KernelContext& ctx,
                                  const BoundaryMesh& mesh,
                                  const NystromOptions& opts) {
  return assemble_layer_matrix(mesh, ctx, LayerOp::TraceKstar, opts) * f;
}

BIESystem build_system(const BoundaryMesh& mesh, const KernelContext& ctx,
                       BIEKind kind, const NystromOptions& opts) {
  BIESystem sys;
  sys.kind = kind;
  sys.mesh = mesh;
  sys.ctx = ctx;
  if (kind == BIEKind::Dirichlet) {
    sys.op = assemble_layer_matrix(mesh, ctx, LayerOp::TraceKstar, opts);
    sys.op.diagonal().array() -= 0.5;
  } else if (kind == BIEKind::Neumann) {
    sys.op = assemble_layer_matrix(mesh, ctx, LayerOp::TraceK, opts);
    sys.op.diagonal().array() += 0.5;
  } else {
    sys.op = assemble_layer_matrix(mesh, ctx, LayerOp::Single, opts);
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys.op);
  sys.rcond = lu.rcond();
  return sys;
}

namespace {

SolutionHandle solve_second_kind(const BoundaryMesh& mesh,
                                 const KernelContext& ctx, BIEKind kind,
                                 const Eigen::VectorXd& data,
                                 const NystromOptions& opts) {
  BIESystem sys = build_system(mesh, ctx, kind, opts);
  if (sys.rcond < 1e-13)
    throw std::runtime_error(
        "second-kind system near-singular (rcond = " +
        std::to_string(sys.rcond) + ")");
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys.op);
  SolutionHandle sol;
  sol.kind = kind;
  sol.mesh = mesh;
  sol.ctx = ctx;
  sol.opts = opts;
  sol.density = lu.solve(data);
  sol.rcond = sys.rcond;
  const double dn = data.norm();
  sol.solve_residual =
      dn > 0.0 ? (sys.op * sol.density - data).norm() / dn : 0.0;
  return sol;
}

}  // namespace

SolutionHandle solve_dirichlet(const BoundaryMesh& mesh,
                               const KernelContext& ctx,
                               const Eigen::VectorXd& g,
                               const NystromOptions& opts) {
  return solve_second_kind(mesh, ctx, BIEKind::Dirichlet, g, opts);
}

SolutionHandle solve_neumann(const BoundaryMesh& mesh,
                             const KernelContext& ctx,
                             const Eigen::VectorXd& f,
                             const NystromOptions& opts) {
  return solve_second_kind(mesh, ctx, BIEKind::Neumann, f, opts);
}

SolutionHandle solve_regularity(const BoundaryMesh& mesh,
                                const KernelContext& ctx,
                                const Eigen::VectorXd& g,
                                const NystromOptions& opts) {
  BIESystem sys = build_system(mesh, ctx, BIEKind::Regularity, opts);
  const Eigen::VectorXd& w = mesh.weights;
  const double alpha = opts.tikhonov_scale * mesh.h * mesh.h;
  Eigen::MatrixXd normal =
      sys.op.transpose() * w.asDiagonal() * sys.op;
  normal += alpha * Eigen::MatrixXd(w.asDiagonal());
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(normal);
  const double rc = lu.rcond();
  if (rc < 1e-14)
    throw std::runtime_error(
        "first-kind system too ill-conditioned (rcond = " +
        std::to_string(rc) + "); refine the mesh or use the Dirichlet route");
  SolutionHandle sol;
  sol.kind = BIEKind::Regularity;
  sol.mesh = mesh;
  sol.ctx = ctx;
  sol.opts = opts;
  sol.density = lu.solve(sys.op.transpose() * (w.asDiagonal() * g));
  sol.rcond = rc;
  const Eigen::VectorXd r = sys.op * sol.density - g;
  const double gw = std::sqrt(g.dot(w.asDiagonal() * g));
  sol.solve_residual =
      gw > 0.0 ? std::sqrt(r.dot(w.asDiagonal() * r)) / gw : 0.0;
  return sol;
}

double SolutionHandle::eval(const Eigen::Vector3d& x) const {
  if (kind == BIEKind::Dirichlet)
    return apply_double_layer(density, x, ctx, mesh, opts);
  return apply_single_layer(density, x, ctx, mesh, opts);
}

Eigen::Vector3d SolutionHandle::grad(const Eigen::Vector3d& x) const {
  if (kind == BIEKind::Dirichlet)
    return double_layer_gradient(density, x, ctx, mesh, opts);
  return single_layer_gradient(density, x, ctx, mesh, opts);
}

JumpReport jump_check(const Eigen::VectorXd& f, const KernelContext& ctx,
                      const BoundaryMesh& mesh, const NystromOptions& opts,
                      int stride) {
  const Eigen::MatrixXd K =
      assemble_layer_matrix(mesh, ctx, LayerOp::TraceK, opts);
  const Eigen::MatrixXd Kst =
      assemble_layer_matrix(mesh, ctx, LayerOp::TraceKstar, opts);
  const Eigen::VectorXd kf = K * f;
  const Eigen::VectorXd kstf = Kst * f;

  JumpReport report;
  double w_sum = 0.0;
  double jump_dev2 = 0.0, plus_dev2 = 0.0, minus_dev2 = 0.0;
  double dplus_dev2 = 0.0, dminus_dev2 = 0.0;
  double ref_jump2 = 0.0, ref_plus2 = 0.0, ref_minus2 = 0.0;
  double ref_dplus2 = 0.0, ref_dminus2 = 0.0;

  const long N = mesh.size();
#pragma omp parallel for schedule(dynamic, 4) reduction(+:w_sum, jump_dev2, \
    plus_dev2, minus_dev2, dplus_dev2, dminus_dev2, ref_jump2, ref_plus2, \
    ref_minus2, ref_dplus2, ref_dminus2)
  for (long i = 0; i < N; i += stride) {
    const Eigen::Vector3d xi = mesh.nodes.row(i);
    const Eigen::Vector3d ni = mesh.normals.row(i);
    const Eigen::Vector3d dir = ctx.A * ni;
    // Local spacing sets the extrapolation offsets.
    Eigen::Vector3d xx, xt, xp;
    mesh.shape->frame(mesh.theta[i], mesh.phi[i], &xx, &xt, &xp);
    const double t0 = 0.5 * mesh.dth * xt.norm();

    Eigen::Vector3d gplus[3], gminus[3];
    double dplus[3], dminus[3];
    for (int q = 0; q < 3; ++q) {
      const double t = t0 * (1 << q);
      gplus[q] = single_layer_gradient(f, xi - t * ni, ctx, mesh, opts);
      gminus[q] = single_layer_gradient(f, xi + t * ni, ctx, mesh, opts);
      dplus[q] = apply_double_layer(f, xi - t * ni, ctx, mesh, opts);
      dminus[q] = apply_double_layer(f, xi + t * ni, ctx, mesh, opts);
    }
    // Richardson to t -> 0 over {t, 2t, 4t}.
    auto extrap3 = [](const Eigen::Vector3d* v) {
      return (8.0 * v[0] - 6.0 * v[1] + v[2]) / 3.0;
    };
    auto extrap1 = [](const double* v) {
      return (8.0 * v[0] - 6.0 * v[1] + v[2]) / 3.0;
    };
    const Eigen::Vector3d grad_plus = extrap3(gplus);   // inside limit
    const Eigen::Vector3d grad_minus = extrap3(gminus); // outside limit
    const double d_plus = extrap1(dplus);
    const double d_minus = extrap1(dminus);

    const double w = mesh.weights[i];
    w_sum += w;
    const double con_plus = dir.dot(grad_plus);
    const double con_minus = dir.dot(grad_minus);

    // Jump of the conormal equals the density.
    jump_dev2 += w * std::pow(con_plus - con_minus - f[i], 2);
    ref_jump2 += w * f[i] * f[i];
    // One-sided limits vs (+-1/2 I + K) f.
    plus_dev2 += w * std::pow(con_plus - (0.5 * f[i] + kf[i]), 2);
    ref_plus2 += w * std::pow(0.5 * f[i] + kf[i], 2);
    minus_dev2 += w * std::pow(con_minus - (-0.5 * f[i] + kf[i]), 2);
    ref_minus2 += w * std::pow(-0.5 * f[i] + kf[i], 2);
    // Double layer limits vs (-+1/2 I + K*) f.
    dplus_dev2 += w * std::pow(d_plus - (-0.5 * f[i] + kstf[i]), 2);
    ref_dplus2 += w * std::pow(-0.5 * f[i] + kstf[i], 2);
    dminus_dev2 += w * std::pow(d_minus - (0.5 * f[i] + kstf[i]), 2);
    ref_dminus2 += w * std::pow(0.5 * f[i] + kstf[i], 2);
  }

  // Full-gradient jump vs n H(n) f at a subsample of nodes.
  double grad_jump_dev = 0.0;
  for (long i = 0; i < N; i += std::max(stride, static_cast<int>(N / 64))) {
    const Eigen::Vector3d xi = mesh.nodes.row(i);
    const Eigen::Vector3d ni = mesh.normals.row(i);
    Eigen::Vector3d xx, xt, xp;
    mesh.shape->frame(mesh.theta[i], mesh.phi[i], &xx, &xt, &xp);
    const double t0 = 0.5 * mesh.dth * xt.norm();
    Eigen::Vector3d gp[3], gm[3];
    for (int q = 0; q < 3; ++q) {
      const double t = t0 * (1 << q);
      gp[q] = single_layer_gradient(f, xi - t * ni, ctx, mesh, opts);
      gm[q] = single_layer_gradient(f, xi + t * ni, ctx, mesh, opts);
    }
    const Eigen::Vector3d jump =
        (8.0 * (gp[0] - gm[0]) - 6.0 * (gp[1] - gm[1]) + (gp[2] - gm[2])) /
        3.0;
    const double H = 1.0 / ni.dot(ctx.A * ni);
    const Eigen::Vector3d expected = ni * H * f[i];
    const double scale = std::max(expected.norm(), 1e-14);
    grad_jump_dev = std::max(grad_jump_dev,
                             (jump - expected).norm() / scale);
  }

  report.conormal_jump_dev = std::sqrt(jump_dev2 / std::max(ref_jump2, 1e-300));
  report.conormal_plus_dev = std::sqrt(plus_dev2 / std::max(ref_plus2, 1e-300));
  report.conormal_minus_dev =
      std::sqrt(minus_dev2 / std::max(ref_minus2, 1e-300));
  report.double_plus_dev =
      std::sqrt(dplus_dev2 / std::max(ref_dplus2, 1e-300));
  report.double_minus_dev =
      std::sqrt(dminus_dev2 / std::max(ref_dminus2, 1e-300));
  report.gradient_jump_dev = grad_jump_dev;
  report.nodes_checked = static_cast<int>((N + stride - 1) / stride);
  return report;
}

}  // namespace hlp
