// Copyright (c) 2026 The hlp authors.
// SPDX-License-Identifier: Apache-2.0
#include "hlp/kernels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hlp/bessel.hpp"

namespace hlp {

namespace {

constexpr double kPi = std::numbers::pi;

// Radial kernel Phi_L of -Laplace + L in R^d and its first two derivatives:
//   Phi_L(r) = (2 pi)^{-d/2} (sqrt(L)/r)^{(d-2)/2} K_{(d-2)/2}(sqrt(L) r).
struct RadialKernel {
  double value, d1, d2;
};

RadialKernel phi_L(double r, double L, int d, bool want_d2) {
  const double s = std::sqrt(L);
  const double z = s * r;
  const double nu = 0.5 * (d - 2);
  RadialKernel out{0.0, 0.0, 0.0};
  if (z > 740.0) return out;
  const double pref = std::pow(2.0 * kPi, -0.5 * d) * std::pow(s, nu);
  double k_nu, k_nu1;
  bessel_k_pair(nu, z, &k_nu, &k_nu1);
  const double rmnu = std::pow(r, -nu);
  out.value = pref * rmnu * k_nu;
  // d/dr [ r^{-nu} K_nu(s r) ] = -s r^{-nu} K_{nu+1}(s r)
  out.d1 = -pref * s * rmnu * k_nu1;
  if (want_d2) {
    // d/dr [ r^{-nu} K_{nu+1}(s r) ]
    //   = -nu r^{-nu-1} K_{nu+1} - (s/2) r^{-nu} (K_nu + K_{nu+2})
    const double k_nu2 = k_nu + 2.0 * (nu + 1.0) / z * k_nu1;
    out.d2 = -pref * s *
             (-nu / r * rmnu * k_nu1 - 0.5 * s * rmnu * (k_nu + k_nu2));
  }
  return out;
}

void require_valid_point(const Eigen::Vector3d& x, int d) {
  double n2 = 0.0;
  for (int a = 0; a < d; ++a) n2 += x[a] * x[a];
  if (n2 == 0.0) throw std::domain_error("kernel evaluated at x = 0");
}

}  // namespace

KernelContext KernelContext::make(int d, const Eigen::Matrix3d& A,
                                  const Eigen::Vector3d& V,
                                  const Eigen::Vector3d& B, double c,
                                  double lambda, bool include_c_in_L) {
  KernelContext ctx;
  ctx.d = d;
  ctx.A = Eigen::Matrix3d::Identity();
  ctx.A.topLeftCorner(d, d) =
      0.5 * (A.topLeftCorner(d, d) + A.topLeftCorner(d, d).transpose());
  ctx.V = Eigen::Vector3d::Zero();
  ctx.B = Eigen::Vector3d::Zero();
  ctx.V.head(d) = V.head(d);
  ctx.B.head(d) = B.head(d);
  ctx.c = c;
  ctx.lambda = lambda;

  Eigen::LLT<Eigen::MatrixXd> llt(ctx.A.topLeftCorner(d, d));
  if (llt.info() != Eigen::Success)
    throw std::domain_error("leading tensor is not SPD");
  Eigen::MatrixXd inv_d =
      llt.solve(Eigen::MatrixXd::Identity(d, d));
  ctx.A_inv = Eigen::Matrix3d::Identity();
  ctx.A_inv.topLeftCorner(d, d) = inv_d;
  double det = 1.0;
  for (int a = 0; a < d; ++a) det *= llt.matrixL()(a, a) * llt.matrixL()(a, a);
  ctx.sqrt_det = std::sqrt(det);

  const Eigen::Vector3d drift = ctx.B - ctx.V;
  ctx.tilt = 0.5 * (ctx.A_inv * drift);
  ctx.L = lambda + (include_c_in_L ? c : 0.0) +
          0.25 * drift.dot(ctx.A_inv * drift);
  return ctx;
}

KernelContext KernelContext::from_homogenized(
    const HomogenizedCoefficients& H, double lambda, bool include_c_in_L) {
  if (H.m != 1)
    throw std::invalid_argument("kernel context requires m = 1");
  Eigen::Matrix3d A = Eigen::Matrix3d::Identity();
  Eigen::Vector3d V = Eigen::Vector3d::Zero(), B = Eigen::Vector3d::Zero();
  for (int i = 0; i < H.d; ++i) {
    for (int j = 0; j < H.d; ++j) A(i, j) = H.a(i, j, 0, 0);
    V[i] = H.V_hat[i](0, 0);
    B[i] = H.B_hat[i](0, 0);
  }
  return make(H.d, A, V, B, H.c_hat(0, 0), lambda, include_c_in_L);
}

KernelContext KernelContext::adjoint() const {
  KernelContext ctx = *this;
  ctx.V = B;
  ctx.B = V;
  ctx.tilt = -tilt;
  return ctx;
}

double KernelContext::r_A(const Eigen::Vector3d& x) const {
  return std::sqrt(x.dot(A_inv * x));
}

double gamma_hatA(const Eigen::Vector3d& x, const KernelContext& ctx) {
  require_valid_point(x, ctx.d);
  const double r = ctx.r_A(x);
  if (ctx.d == 3) return 1.0 / (4.0 * kPi * ctx.sqrt_det * r);
  return -std::log(r) / (2.0 * kPi * ctx.sqrt_det);
}

Eigen::Vector3d gamma_hatA_grad(const Eigen::Vector3d& x,
                                const KernelContext& ctx) {
  require_valid_point(x, ctx.d);
  const double r = ctx.r_A(x);
  const Eigen::Vector3d w = ctx.A_inv * x;
  if (ctx.d == 3) return -w / (4.0 * kPi * ctx.sqrt_det * r * r * r);
  return -w / (2.0 * kPi * ctx.sqrt_det * r * r);
}

double gamma_0(const Eigen::Vector3d& x, const KernelContext& ctx) {
  require_valid_point(x, ctx.d);
  if (ctx.L <= 0.0)
    throw std::domain_error("operator not coercive: L <= 0");
  const double r = ctx.r_A(x);
  const RadialKernel phi = phi_L(r, ctx.L, ctx.d, false);
  return std::exp(ctx.tilt.dot(x)) / ctx.sqrt_det * phi.value;
}

Eigen::Vector3d gamma_0_grad(const Eigen::Vector3d& x,
                             const KernelContext& ctx) {
  require_valid_point(x, ctx.d);
  if (ctx.L <= 0.0)
    throw std::domain_error("operator not coercive: L <= 0");
  const double r = ctx.r_A(x);
  const RadialKernel phi = phi_L(r, ctx.L, ctx.d, false);
  const double tilt_factor = std::exp(ctx.tilt.dot(x)) / ctx.sqrt_det;
  const Eigen::Vector3d w = (ctx.A_inv * x) / r;
  Eigen::Vector3d g =
      tilt_factor * (phi.value * ctx.tilt + phi.d1 * w);
  for (int a = ctx.d; a < 3; ++a) g[a] = 0.0;
  return g;
}

Eigen::Matrix3d gamma_0_hess(const Eigen::Vector3d& x,
                             const KernelContext& ctx) {
  require_valid_point(x, ctx.d);
  if (ctx.L <= 0.0)
    throw std::domain_error("operator not coercive: L <= 0");
  const double r = ctx.r_A(x);
  const RadialKernel phi = phi_L(r, ctx.L, ctx.d, true);
  const double tilt_factor = std::exp(ctx.tilt.dot(x)) / ctx.sqrt_det;
  const Eigen::Vector3d w = (ctx.A_inv * x) / r;
  const Eigen::Vector3d g = ctx.tilt;
  Eigen::Matrix3d H =
      phi.value * g * g.transpose() +
      phi.d1 * (g * w.transpose() + w * g.transpose()) +
      phi.d2 * w * w.transpose() +
      phi.d1 * (ctx.A_inv - w * w.transpose()) / r;
  H *= tilt_factor;
  for (int a = ctx.d; a < 3; ++a) {
    H.row(a).setZero();
    H.col(a).setZero();
  }
  return H;
}

DifferenceRate kernel_difference_rate(const KernelContext& ctx, int l) {
  if (l != 0 && l != 1)
    throw std::invalid_argument("derivative order must be 0 or 1");
  Eigen::Vector3d ray = Eigen::Vector3d::Zero();
  for (int a = 0; a < ctx.d; ++a) ray[a] = 1.0;
  ray.normalize();

  const int n_pts = 13;
  DifferenceRate out;
  std::vector<double> logs_r, logs_v;
  for (int q = 0; q < n_pts; ++q) {
    const double r =
        1e-3 * std::pow(100.0, static_cast<double>(q) / (n_pts - 1));
    const Eigen::Vector3d x = r * ray;
    double diff, scale;
    if (l == 0) {
      diff = std::abs(gamma_0(x, ctx) - gamma_hatA(x, ctx));
      scale = std::abs(gamma_hatA(x, ctx));
    } else {
      diff = (gamma_0_grad(x, ctx) - gamma_hatA_grad(x, ctx)).norm();
      scale = gamma_hatA_grad(x, ctx).norm();
    }
    out.max_rel_diff = std::max(out.max_rel_diff, diff / scale);
    if (diff > 0.0) {
      logs_r.push_back(std::log(r));
      logs_v.push_back(std::log(diff));
    }
  }
  if (out.max_rel_diff < 1e-13 || logs_r.size() < 4) {
    out.exact = true;
    return out;
  }
  const int n = static_cast<int>(logs_r.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int q = 0; q < n; ++q) {
    sx += logs_r[q];
    sy += logs_v[q];
    sxx += logs_r[q] * logs_r[q];
    sxy += logs_r[q] * logs_v[q];
  }
  out.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return out;
}

}  // namespace hlp
