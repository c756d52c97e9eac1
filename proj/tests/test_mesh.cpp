// Copyright (c) 2026 The hlp authors.
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hlp/bie.hpp"
#include "hlp/mesh.hpp"

using namespace hlp;

namespace {

KernelContext laplace_ctx() {
  return KernelContext::make(3, Eigen::Matrix3d::Identity(),
                             Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(),
                             0.0, 1e-12);
}

// Adaptive Simpson oracle for the surface area of a shape.
double simpson_area(const SurfaceShape& shape, double a, double b, double fa,
                    double fm, double fb, double tol, int depth) {
  const double m = 0.5 * (a + b);
  auto phi_integral = [&shape](double th) {
    const int nq = 64;
    double acc = 0.0;
    for (int q = 0; q < nq; ++q)
      acc += shape.jacobian(th, 2.0 * M_PI * q / nq);
    return acc * 2.0 * M_PI / nq;
  };
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = phi_integral(lm), frm = phi_integral(rm);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth > 12 || std::abs(left + right - whole) < tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson_area(shape, a, m, fa, flm, fm, tol / 2, depth + 1) +
         simpson_area(shape, m, b, fm, frm, fb, tol / 2, depth + 1);
}

double adaptive_area(const SurfaceShape& shape) {
  auto phi_integral = [&shape](double th) {
    const int nq = 64;
    double acc = 0.0;
    for (int q = 0; q < nq; ++q)
      acc += shape.jacobian(th, 2.0 * M_PI * q / nq);
    return acc * 2.0 * M_PI / nq;
  };
  const double a = 0.0, b = M_PI;
  return simpson_area(shape, a, b, phi_integral(a),
                      phi_integral(0.5 * (a + b)), phi_integral(b), 1e-10, 0);
}

}  // namespace

TEST_CASE("sphere mesh: area, closedness, normals") {
  for (int n : {16, 32}) {
    BoundaryMesh mesh = make_boundary_mesh(std::make_shared<Sphere>(1.0), n);
    CHECK(mesh.weights.sum() ==
          doctest::Approx(4.0 * M_PI).epsilon(1e-10));
    Eigen::Vector3d flux = Eigen::Vector3d::Zero();
    for (long p = 0; p < mesh.size(); ++p)
      flux += mesh.weights[p] * mesh.normals.row(p).transpose();
    CHECK(flux.norm() <= 1e-10);
    for (long p = 0; p < mesh.size(); p += 37) {
      CHECK(mesh.normals.row(p).norm() == doctest::Approx(1.0).epsilon(1e-14));
      // Outward: n . (x - center) > 0.
      CHECK(mesh.normals.row(p).dot(mesh.nodes.row(p)) > 0.0);
    }
  }
}

TEST_CASE("ellipsoid and star areas vs adaptive quadrature oracle") {
  auto ell = std::make_shared<Ellipsoid>(2.0, 1.0, 1.0);
  const double oracle = adaptive_area(*ell);
  BoundaryMesh mesh = make_boundary_mesh(ell, 64);
  CHECK(std::abs(mesh.weights.sum() - oracle) <= 1e-3 * oracle);

  auto star = std::make_shared<StarShape>();
  const double so = adaptive_area(*star);
  BoundaryMesh smesh = make_boundary_mesh(star, 32);
  CHECK(std::abs(smesh.weights.sum() - so) <= 1e-3 * so);
  Eigen::Vector3d flux = Eigen::Vector3d::Zero();
  for (long p = 0; p < smesh.size(); ++p)
    flux += smesh.weights[p] * smesh.normals.row(p).transpose();
  CHECK(flux.norm() <= 1e-6);
}

TEST_CASE("double-cover fold is involutive and consistent") {
  BoundaryMesh mesh = make_boundary_mesh(std::make_shared<Sphere>(1.0), 16);
  // Reflected indices land on the physically identical point.
  for (int kp : {0, 5, 17}) {
    const long a = mesh.fold(-1, kp);
    const long b = mesh.fold(0, kp + mesh.n_phi / 2);
    CHECK(a == b);
    Eigen::Vector3d x1, n1, x2, n2;
    double J1, J2;
    mesh.cover_frame(mesh.theta_tilde(-1), kp * mesh.dph, &x1, &n1, &J1);
    mesh.cover_frame(mesh.theta_tilde(0), (kp + mesh.n_phi / 2) * mesh.dph,
                     &x2, &n2, &J2);
    CHECK((x1 - x2).norm() <= 1e-14);
    CHECK(std::abs(J1 - J2) <= 1e-12);
  }
}

TEST_CASE("single layer of the constant density on the unit sphere") {
  // Laplace limit: S(1) = 1 on the surface, R^2/|x| outside, 1 inside.
  KernelContext ctx = laplace_ctx();
  double prev_err = 1.0;
  for (int n : {16, 24, 32}) {
    BoundaryMesh mesh = make_boundary_mesh(std::make_shared<Sphere>(1.0), n);
    Eigen::MatrixXd S = assemble_layer_matrix(mesh, ctx, LayerOp::Single);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(mesh.size());
    const Eigen::VectorXd row_sums = S * ones;
    const double err = (row_sums.array() - 1.0).abs().maxCoeff();
    CHECK(err < prev_err);
    prev_err = err;
  }
  CHECK(prev_err <= 2e-5);

  BoundaryMesh mesh = make_boundary_mesh(std::make_shared<Sphere>(1.0), 24);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(mesh.size());
  CHECK(apply_single_layer(ones, Eigen::Vector3d::Zero(), ctx, mesh) ==
        doctest::Approx(1.0).epsilon(1e-8));
  CHECK(apply_single_layer(ones, Eigen::Vector3d(2, 0, 0), ctx, mesh) ==
        doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("near-surface single layer evaluation") {
  KernelContext ctx = laplace_ctx();
  BoundaryMesh mesh = make_boundary_mesh(std::make_shared<Sphere>(1.0), 24);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(mesh.size());
  // Exterior: R^2/r with r barely off the surface; interior: exactly 1.
  for (double delta : {0.5, 0.1, 0.02}) {
    const Eigen::Vector3d dir =
        Eigen::Vector3d(0.3, -0.7, 0.64).normalized();
    const double vout = apply_single_layer(ones, (1.0 + delta) * dir, ctx,
                                           mesh);
    CHECK(vout == doctest::Approx(1.0 / (1.0 + delta)).epsilon(2e-4));
    const double vin =
        apply_single_layer(ones, (1.0 - delta) * dir, ctx, mesh);
    CHECK(vin == doctest::Approx(1.0).epsilon(2e-4));
  }
}

TEST_CASE("double layer Gauss identity and K* row sums") {
  KernelContext ctx = laplace_ctx();
  BoundaryMesh mesh = make_boundary_mesh(std::make_shared<Sphere>(1.0), 24);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(mesh.size());
  CHECK(apply_double_layer(ones, Eigen::Vector3d(0.2, 0.1, -0.3), ctx, mesh)
        == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(apply_double_layer(ones, Eigen::Vector3d(0, 0, 3), ctx, mesh) ==
        doctest::Approx(0.0).epsilon(1e-8));
  Eigen::MatrixXd Kst = assemble_layer_matrix(mesh, ctx, LayerOp::TraceKstar);
  const Eigen::VectorXd row_sums = Kst * ones;
  CHECK((row_sums.array() + 0.5).abs().maxCoeff() <= 2e-4);
}

TEST_CASE("screened single layer values") {
  // lambda = 1: S(1)(0) = 4 pi Gamma_0(e1) = exp(-1).
  KernelContext ctx = KernelContext::make(
      3, Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero(),
      Eigen::Vector3d::Zero(), 0.0, 1.0);
  BoundaryMesh mesh = make_boundary_mesh(std::make_shared<Sphere>(1.0), 24);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(mesh.size());
  CHECK(apply_single_layer(ones, Eigen::Vector3d::Zero(), ctx, mesh) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-7));
  // Linearity.
  Eigen::VectorXd f(mesh.size()), g(mesh.size());
  for (long p = 0; p < mesh.size(); ++p) {
    f[p] = std::sin(mesh.nodes(p, 0));
    g[p] = mesh.nodes(p, 2);
  }
  const Eigen::Vector3d x(0.4, 0.2, 0.1);
  const double lhs = apply_single_layer(2.0 * f + 3.0 * g, x, ctx, mesh);
  const double rhs = 2.0 * apply_single_layer(f, x, ctx, mesh) +
                     3.0 * apply_single_layer(g, x, ctx, mesh);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
}
